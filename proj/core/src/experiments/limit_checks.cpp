#include "repdyn/csv.hpp"
#include "repdyn/dynamics.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/spectral.hpp"
#include "repdyn/svg.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

namespace repdyn {
namespace {

// Separate seed families so the sub-studies never share draws.
enum SeedFamily : std::uint64_t { kEnsembleGap = 11, kCovariance = 12, kWeightGram = 13, kWeightSum = 14, kReduction = 15 };

std::uint64_t family_seed(std::uint64_t master, SeedFamily family, std::uint64_t index) {
  return derive_seed(derive_seed(master, family), index);
}

double max_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) gap = std::max(gap, (a.states[i] - b.states[i]).norm());
  return gap;
}

double relative_error(const Matrix& estimate, const Matrix& truth) { return (estimate - truth).norm() / truth.norm(); }

}  // namespace

std::vector<Param> LimitChecksConfig::params() {
  return {{"seed", &seed},
          {"M_list", &m_list},
          {"seeds", &seeds},
          {"K", &k},
          {"gamma", &gamma},
          {"t_max", &t_max},
          {"intervals", &intervals},
          {"step", &step},
          {"tolerance_schedule", &tolerance_schedule},
          {"cov_seeds", &cov_seeds},
          {"cov_heads", &cov_heads},
          {"cov_K", &cov_k},
          {"cov_tol", &cov_tol},
          {"weight_M", &weight_m},
          {"weight_K", &weight_k},
          {"weight_seeds", &weight_seeds},
          {"weight_tol", &weight_tol},
          {"ks_seeds", &ks_seeds},
          {"ks_alpha", &ks_alpha}};
}

Matrix second_moment(const Matrix& samples) {
  if (samples.cols() < 1) throw ConfigurationError("second_moment: no samples");
  return samples * samples.transpose() / static_cast<double>(samples.cols());
}

double kolmogorov_pvalue(double d, std::size_t n) {
  if (n == 0) throw ConfigurationError("kolmogorov_pvalue: empty sample");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::pair<double, double> ks_test_chi(std::vector<double> sample, int dof) {
  if (sample.empty() || dof < 1) throw ConfigurationError("ks_test_chi: need a sample and dof >= 1");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double x = sample[i];
    const double cdf = x <= 0.0 ? 0.0 : boost::math::gamma_p(0.5 * dof, 0.5 * x * x);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_pvalue(d, sample.size())};
}

ReportBundle run_limit_checks(LimitChecksConfig c) {
  if (c.seeds < 1 || c.k < 1 || c.m_list.empty()) throw ConfigurationError("limit-checks: seeds, K, M_list invalid");
  if (c.tolerance_schedule.size() % 2 != 0) {
    throw ConfigurationError("limit-checks: tolerance_schedule must list M,tolerance pairs");
  }
  std::vector<int> ms;
  for (double m : c.m_list) {
    if (!(m >= 1.0) || m != std::floor(m)) throw ConfigurationError("limit-checks: M_list entries must be integers >= 1");
    ms.push_back(static_cast<int>(m));
  }
  ReportBundle bundle;
  bundle.name = "limit-checks";
  bundle.config = make_record(c.params());

  const Mdp mdp = build_reference_chain();
  const MarkovChain chain = induce(mdp, Policy::uniform(mdp.n_states(), mdp.n_actions()), c.gamma);
  const MarkovChain silent = chain.with_reward(Vector::Zero(chain.n_states()));
  const Eigen::Index n = chain.n_states();
  const Matrix identity = Matrix::Identity(n, n);
  const std::vector<double> times = time_grid(c.t_max, c.intervals);

  // Finite-M ensembles with frozen weights versus exp(-t(I - gamma P)) Phi_0.
  Matrix gaps(c.seeds, static_cast<Eigen::Index>(ms.size()) + 1);
  std::vector<std::string> gap_header{"seed_index"};
  for (int m : ms) gap_header.push_back("gap_M" + std::to_string(m));
  for (int s = 0; s < c.seeds; ++s) {
    const std::uint64_t rep = family_seed(c.seed, kEnsembleGap, static_cast<std::uint64_t>(s));
    const Matrix phi0 = sample_features(n, c.k, rep);
    const Trajectory limit = linear_limit_flow({c.gamma * chain.transition() - identity, Matrix::Zero(n, c.k), phi0}, times);
    gaps(s, 0) = s;
    for (std::size_t i = 0; i < ms.size(); ++i) {
      EnsembleState state{phi0, sample_weights(ms[i], c.k, 1.0 / ms[i], derive_seed(rep, static_cast<std::uint64_t>(ms[i]))),
                          std::nullopt};
      const Trajectory finite = ensemble_flow(silent, state, 1.0, 0.0, times, c.step, false);
      gaps(s, static_cast<Eigen::Index>(i) + 1) = max_gap(finite, limit);
    }
  }
  bundle.add_table("ensemble_limit_gaps", matrix_to_csv(gaps, gap_header));
  for (std::size_t i = 0; i + 1 < c.tolerance_schedule.size(); i += 2) {
    const int m = static_cast<int>(c.tolerance_schedule[i]);
    const auto it = std::find(ms.begin(), ms.end(), m);
    if (it == ms.end()) throw ConfigurationError("limit-checks: tolerance_schedule names M not in M_list");
    const Eigen::Index col = (it - ms.begin()) + 1;
    bundle.add_check("ensemble_limit_gap_M" + std::to_string(m), gaps.col(col).maxCoeff(), "<", c.tolerance_schedule[i + 1],
                     "ensemble_limit_gaps");
  }
  std::vector<Eigen::Index> multi;
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (ms[i] >= 2) multi.push_back(static_cast<Eigen::Index>(i) + 1);
  if (multi.size() >= 2) {
    const auto by_m = [&](Eigen::Index a, Eigen::Index b) { return ms[a - 1] < ms[b - 1]; };
    const Eigen::Index smallest = *std::min_element(multi.begin(), multi.end(), by_m);
    const Eigen::Index largest = *std::max_element(multi.begin(), multi.end(), by_m);
    double violations = 0.0;
    for (int s = 0; s < c.seeds; ++s) violations += gaps(s, largest) < gaps(s, smallest) ? 0.0 : 1.0;
    bundle.add_check("ensemble_limit_gap_shrinks_M" + std::to_string(ms[smallest - 1]) + "_to_M" +
                         std::to_string(ms[largest - 1]),
                     violations, "==", 0.0, "ensemble_limit_gaps");
  }

  if (std::find(ms.begin(), ms.end(), 1) != ms.end()) {
    // One head with trained weights is the joint flow.
    const std::uint64_t rep = family_seed(c.seed, kReduction, 0);
    const Matrix phi0 = sample_features(n, c.k, rep);
    const Matrix w0 = sample_weights(1, c.k, 1.0, rep);
    const Trajectory ens = ensemble_flow(chain, {phi0, w0, std::nullopt}, 1.0, 1.0, times, c.step, true);
    const Trajectory joint = joint_flow(chain, phi0, w0.col(0), 1.0, 1.0, times, c.step);
    double diff = max_gap(ens, joint);
    for (std::size_t i = 0; i < ens.weights.size(); ++i) diff = std::max(diff, (ens.weights[i] - joint.weights[i]).norm());
    Matrix t(1, 1);
    t << diff;
    bundle.add_table("m1_reduction", matrix_to_csv(t, {"max_difference"}));
    bundle.add_check("ensemble_m1_equals_joint_flow", diff, "<", 1e-12, "m1_reduction");
  }

  // Random cumulants: Z = sum_m r^m (w^m)^T and Phi_inf = Psi Z.
  const Matrix psi = resolvent(chain.transition(), c.gamma);
  const Matrix target_phi = psi * psi.transpose();
  Matrix z_samples(n, static_cast<Eigen::Index>(c.cov_seeds) * c.cov_k);
  Matrix phi_samples(n, z_samples.cols());
  for (int s = 0; s < c.cov_seeds; ++s) {
    const std::uint64_t rep = family_seed(c.seed, kCovariance, static_cast<std::uint64_t>(s));
    const Matrix cumulants = sample_cumulants(c.cov_heads, identity, rep);
    const Matrix w = sample_weights(c.cov_heads, c.cov_k, 1.0 / c.cov_heads, rep);
    const Matrix z = cumulants * w.transpose();
    z_samples.middleCols(static_cast<Eigen::Index>(s) * c.cov_k, c.cov_k) = z;
    phi_samples.middleCols(static_cast<Eigen::Index>(s) * c.cov_k, c.cov_k) =
        linear_flow_fixed_point({c.gamma * chain.transition() - identity, z, Matrix::Zero(n, c.cov_k)});
  }
  auto column_errors = [&](const Matrix& samples, const Matrix& truth) {
    double worst = 0.0;
    for (int col = 0; col < c.cov_k; ++col) {
      Matrix picked(n, c.cov_seeds);
      for (int s = 0; s < c.cov_seeds; ++s) picked.col(s) = samples.col(static_cast<Eigen::Index>(s) * c.cov_k + col);
      worst = std::max(worst, relative_error(second_moment(picked), truth));
    }
    return worst;
  };
  const double phi_error = relative_error(second_moment(phi_samples), target_phi);
  const double z_error = relative_error(second_moment(z_samples), identity);
  Matrix cov(2, 2);
  cov << phi_error, column_errors(phi_samples, target_phi), z_error, column_errors(z_samples, identity);
  bundle.add_table("covariance", "# rows: phi_inf vs Psi Sigma Psi^T, reward matrix Z vs Sigma (Sigma = I)\n" +
                                     matrix_to_csv(cov, {"pooled_relative_error", "worst_single_column_error"}));
  bundle.add_check("rc_fixed_point_covariance", phi_error, "<", c.cov_tol, "covariance");
  bundle.add_check("reward_matrix_covariance", z_error, "<", c.cov_tol, "covariance");

  // Weight limits: sum w w^T -> I and sum w ~ N(0, I).
  Matrix gram(c.weight_seeds, 2);
  for (int s = 0; s < c.weight_seeds; ++s) {
    const Matrix w = sample_weights(c.weight_m, c.weight_k, 1.0 / c.weight_m,
                                    family_seed(c.seed, kWeightGram, static_cast<std::uint64_t>(s)));
    gram.row(s) << s, (w * w.transpose() - Matrix::Identity(c.weight_k, c.weight_k)).norm();
  }
  bundle.add_table("weight_gram", matrix_to_csv(gram, {"seed_index", "gram_error"}));
  bundle.add_check("weight_gram_limit", gram.col(1).maxCoeff(), "<=", c.weight_tol, "weight_gram");

  std::vector<double> norms;
  for (int s = 0; s < c.ks_seeds; ++s) {
    const Matrix w = sample_weights(c.weight_m, c.weight_k, 1.0 / c.weight_m,
                                    family_seed(c.seed, kWeightSum, static_cast<std::uint64_t>(s)));
    norms.push_back(w.rowwise().sum().norm());
  }
  const auto [ks_d, ks_p] = ks_test_chi(norms, c.weight_k);
  Matrix ks(static_cast<Eigen::Index>(norms.size()), 1);
  for (std::size_t i = 0; i < norms.size(); ++i) ks(static_cast<Eigen::Index>(i), 0) = norms[i];
  bundle.add_table("weight_sum_norms", "# ks_statistic=" + format_double(ks_d) + "\n# ks_pvalue=" + format_double(ks_p) +
                                           "\n" + matrix_to_csv(ks, {"norm"}));
  bundle.add_check("weight_sum_chi_ks_pvalue", ks_p, ">=", c.ks_alpha, "weight_sum_norms");

  SvgOptions opts;
  opts.title = "max_t |Phi^M_t - Phi_t|_F per seed";
  opts.series_labels.assign(gap_header.begin() + 1, gap_header.end());
  bundle.add_figure("ensemble_limit_gaps", emit_svg(gaps, PlotKind::kLine, opts));
  return bundle;
}

}  // namespace repdyn
