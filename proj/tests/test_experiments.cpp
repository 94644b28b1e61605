#include "oracles.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/spectral.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

using namespace repdyn;

namespace {

const Check& check(const ReportBundle& b, const std::string& name) {
  for (const auto& c : b.checks)
    if (c.name == name) return c;
  throw std::runtime_error("no check " + name);
}

Matrix table(const ReportBundle& b, const std::string& name) {
  const std::string* csv = b.table(name);
  if (!csv) throw std::runtime_error("no table " + name);
  return matrix_from_csv(*csv, true);
}

double kolmogorov_series(double lambda) {
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) sum += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace

TEST(TwoState, DefaultChecksPass) {
  const ReportBundle b = run_two_state({});
  for (const auto& c : b.checks) EXPECT_TRUE(c.passed) << c.name << " measured " << c.measured;
  const Matrix traj = table(b, "trajectories");
  EXPECT_EQ(traj.rows(), 2001);
  // Value of the two-state chain by the oracle.
  Matrix p(2, 2);
  p << 0.9, 0.1, 0.9, 0.1;
  const Vector v = oracle::value_iteration(p, Eigen::Vector2d(1.0, 0.0), 0.9, 2000);
  const Matrix summary = table(b, "summary");
  EXPECT_NEAR(summary(0, 0), v(0), 1e-9);
  EXPECT_NEAR(summary(0, 1), v(1), 1e-9);
}

TEST(TwoState, ShortHorizonFailsEndpointCheck) {
  TwoStateConfig c;
  c.t_max = 1.0;
  c.intervals = 10;
  const ReportBundle b = run_two_state(c);
  EXPECT_FALSE(check(b, "td_reaches_v_pi").passed);
  EXPECT_FALSE(b.all_passed());
}

TEST(TwoState, DeterministicTables) {
  const ReportBundle a = run_two_state({});
  const ReportBundle b = run_two_state({});
  EXPECT_EQ(a.tables, b.tables);
  EXPECT_EQ(a.figures, b.figures);
}

TEST(ChainTransfer, ReducedRunHasZeroValueDiagonals) {
  ChainTransferConfig c;
  c.j_max = 8;
  const ReportBundle b = run_chain_transfer(c);
  for (const char* name : {"ebf_value_diagonal_zero", "rsbf_value_diagonal_zero", "rf_value_diagonal_zero"}) {
    EXPECT_TRUE(check(b, name).passed) << name << " " << check(b, name).measured;
  }
  // With V_j appended to the features of pi_j, V_j itself has zero angle.
  const Matrix angles = table(b, "rsbf_value_angles");
  ASSERT_EQ(angles.rows(), angles.cols());
  for (Eigen::Index i = 0; i < angles.rows(); ++i) EXPECT_LT(angles(i, i), 1e-8);
  EXPECT_GT(table(b, "rsbf_angles").diagonal().maxCoeff(), 1e-3);
}

TEST(BayesOptimality, RsbfTraceIsTopSingularEnergy) {
  BayesOptimalityConfig c;
  c.n_random_subspaces = 100;
  c.mc_samples = 20000;
  const ReportBundle b = run_bayes_optimality(c);
  EXPECT_TRUE(check(b, "rsbf_trace_beats_random").passed);
  EXPECT_TRUE(check(b, "full_space_projection_error_zero").passed);
  // Eckart-Young: the best K-dim capture of Psi is the sum of its top K
  // squared singular values.
  const Mdp mdp = build_reference_chain();
  const Matrix p = induce(mdp, Policy::uniform(30, 2), 0.9).transition();
  const Matrix psi = oracle::neumann_resolvent(p, 0.9, 600);
  Eigen::SelfAdjointEigenSolver<Matrix> es(psi * psi.transpose());
  const double expected = es.eigenvalues().tail(4).sum();
  EXPECT_NEAR(table(b, "summary")(0, 0), expected, 1e-8 * expected);
}

TEST(BayesOptimality, RejectsBadConfig) {
  BayesOptimalityConfig c;
  c.k = 0;
  EXPECT_THROW(run_bayes_optimality(c), ConfigurationError);
  c.k = 4;
  c.mc_samples = 1;
  EXPECT_THROW(run_bayes_optimality(c), ConfigurationError);
}

TEST(MultiTask, SingleTaskReducesToEnsembleFlow) {
  MultiTaskConfig c;
  c.l = 1;
  c.m = 200;
  c.t_max = 1.0;
  c.intervals = 5;
  c.limit_time = 50.0;
  const ReportBundle b = run_multi_task(c);
  EXPECT_TRUE(check(b, "l1_equals_single_task_ensemble").passed);
}

TEST(MultiTask, DiscountModeRunsAndBadModesRejected) {
  MultiTaskConfig c;
  c.mode = "discounts";
  c.m = 200;
  c.t_max = 1.0;
  c.intervals = 5;
  c.limit_time = 50.0;
  const ReportBundle b = run_multi_task(c);
  EXPECT_NE(b.table("trajectory_gap"), nullptr);
  c.mode = "bogus";
  EXPECT_THROW(run_multi_task(c), ConfigurationError);
  c.mode = "policies";
  c.m = 201;
  EXPECT_THROW(run_multi_task(c), ConfigurationError);
}

TEST(LimitChecks, ReducedRunIncludesSingleHeadReduction) {
  LimitChecksConfig c;
  c.m_list = {1, 10, 100};
  c.tolerance_schedule = {100, 1.0};
  c.seeds = 2;
  c.t_max = 1.0;
  c.intervals = 5;
  c.cov_seeds = 50;
  c.weight_m = 1000;
  c.weight_seeds = 2;
  c.ks_seeds = 30;
  const ReportBundle b = run_limit_checks(c);
  EXPECT_TRUE(check(b, "ensemble_m1_equals_joint_flow").passed);
  EXPECT_TRUE(check(b, "ensemble_limit_gap_M100").passed);
  c.tolerance_schedule = {5000, 0.1};
  EXPECT_THROW(run_limit_checks(c), ConfigurationError);
}

TEST(FourRooms, ShortRunEmitsFiguresAndTables) {
  FourRoomsConfig c;
  c.t_max = 1.0;
  c.snapshot_times = {0, 0.5, 1};
  c.reference_m = 20;
  const ReportBundle b = run_four_rooms_features(c);
  EXPECT_TRUE(check(b, "t0_snapshot_is_initialization").passed);
  EXPECT_NE(b.table("eigen_projection"), nullptr);
  int heatmaps = 0;
  for (const auto& [name, svg] : b.figures) heatmaps += name.rfind("feature0_t", 0) == 0 ? 1 : 0;
  EXPECT_EQ(heatmaps, 3);
  c.beta_mode = "sometimes";
  EXPECT_THROW(run_four_rooms_features(c), ConfigurationError);
}

TEST(Statistics, KolmogorovPvalueMatchesSeries) {
  for (double d : {0.01, 0.03, 0.05, 0.1}) {
    const std::size_t n = 400;
    const double lambda = (std::sqrt(400.0) + 0.12 + 0.11 / std::sqrt(400.0)) * d;
    EXPECT_NEAR(kolmogorov_pvalue(d, n), kolmogorov_series(lambda), 1e-10) << d;
  }
  // Classic 5% critical value.
  EXPECT_NEAR(kolmogorov_pvalue(1.3581 / std::sqrt(1e10), 10'000'000'000ULL), 0.05, 1e-3);
}

TEST(Statistics, KsAcceptsChiAndRejectsWrongDof) {
  std::mt19937_64 rng(3);
  std::vector<double> norms;
  for (int i = 0; i < 2000; ++i) norms.push_back(oracle::gaussian(rng, 5, 1).norm());
  const auto [d, p] = ks_test_chi(norms, 5);
  EXPECT_GT(p, 1e-3);
  // Brute-force statistic using the chi CDF P(k/2, x^2/2).
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = boost::math::gamma_p(2.5, sorted[i] * sorted[i] / 2.0);
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / 2000.0),
                      std::abs(f - static_cast<double>(i + 1) / 2000.0)});
  }
  EXPECT_NEAR(d, worst, 1e-12);
  EXPECT_LT(ks_test_chi(norms, 7).second, 1e-6);
}

TEST(Statistics, SecondMoment) {
  Matrix s(2, 3);
  s << 1, 2, 3, 0, 1, -1;
  const Matrix expected = s * s.transpose() / 3.0;
  EXPECT_LT((second_moment(s) - expected).norm(), 1e-15);
}
