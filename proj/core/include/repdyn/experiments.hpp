#pragma once

#include "repdyn/mdp.hpp"
#include "repdyn/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace repdyn {

// Each config lists its tunable fields via params(); the defaults are the
// values the shipped checks are calibrated for.

struct TwoStateConfig {
  std::uint64_t seed = 0;
  double stay_a = 0.9;
  double stay_b = 0.1;
  double reward_a = 1.0;
  double reward_b = 0.0;
  double gamma = 0.9;
  double v0_a = 0.0;
  double v0_b = 0.0;
  double t_max = 200.0;
  int intervals = 2000;
  double mc_line_tol = 1e-10;
  double td_angle_tol = 1e-2;
  double endpoint_tol = 1e-6;

  std::vector<Param> params();
};

struct FourRoomsConfig {
  std::uint64_t seed = 0;
  int k = 10;
  int m = 20;
  double t_max = 100.0;
  std::string beta_mode = "train";  // "train" or "fix" for the primary run
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.9;
  double step = 1e-3;
  int reference_m = 200;
  std::vector<double> snapshot_times{0, 5, 10, 25, 50, 100};
  double projection_interval = 2.0;
  double grassmann_tol = 0.1;
  double m1_drift_tol = 0.5;

  std::vector<Param> params();
};

struct ChainTransferConfig {
  std::uint64_t seed = 0;
  int k = 4;
  double gamma = 0.9;
  int j_max = 50;
  int n_states = 30;
  double slip = 0.01;
  bool with_value_feature = true;
  double diagonal_tol = 1e-8;

  std::vector<Param> params();
};

struct LimitChecksConfig {
  std::uint64_t seed = 0;
  std::vector<double> m_list{100, 10000};
  int seeds = 20;
  int k = 4;
  double gamma = 0.9;
  double t_max = 5.0;
  int intervals = 50;
  double step = 1e-3;
  /// Pairs (M, tolerance) flattened: M1, tol1, M2, tol2, ...
  std::vector<double> tolerance_schedule{10000, 0.02};
  int cov_seeds = 2000;
  int cov_heads = 100;
  int cov_k = 10;
  double cov_tol = 0.1;
  int weight_m = 100000;
  int weight_k = 10;
  int weight_seeds = 20;
  double weight_tol = 0.05;
  int ks_seeds = 200;
  double ks_alpha = 0.01;

  std::vector<Param> params();
};

struct BayesOptimalityConfig {
  std::uint64_t seed = 0;
  int k = 4;
  double gamma = 0.9;
  int n_random_subspaces = 1000;
  int mc_samples = 100000;
  double mc_sigmas = 3.0;

  std::vector<Param> params();
};

struct MultiTaskConfig {
  std::uint64_t seed = 0;
  std::string mode = "policies";  // or "discounts"
  int l = 2;
  int m = 10000;
  int k = 4;
  double gamma = 0.9;
  double t_max = 5.0;
  int intervals = 50;
  double step = 1e-3;
  double limit_time = 300.0;
  double gap_tol = 0.05;
  double limit_tol = 0.05;
  double separation = 0.1;
  bool block_orthogonal = true;
  double block_time = 20.0;

  std::vector<Param> params();
};

ReportBundle run_two_state(TwoStateConfig config);
ReportBundle run_four_rooms_features(FourRoomsConfig config);
ReportBundle run_chain_transfer(ChainTransferConfig config);
ReportBundle run_limit_checks(LimitChecksConfig config);
ReportBundle run_bayes_optimality(BayesOptimalityConfig config);
ReportBundle run_multi_task(MultiTaskConfig config);

/// Kolmogorov-Smirnov statistic of `sample` against the chi distribution
/// with `dof` degrees of freedom, and its asymptotic p-value.
std::pair<double, double> ks_test_chi(std::vector<double> sample, int dof);

/// Asymptotic Kolmogorov tail probability P(D_n > d).
double kolmogorov_pvalue(double d, std::size_t n);

/// Empirical second-moment matrix (1/N) sum x x^T of the given mean-zero
/// sample columns.
Eigen::MatrixXd second_moment(const Eigen::MatrixXd& samples);

}  // namespace repdyn
