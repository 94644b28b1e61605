#pragma once

#include "repdyn/mdp.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace repdyn {

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kDivergenceNorm = 1e12;

/// Time-stamped states of a flow. Value flows store |X| x 1 states; feature
/// flows store Phi (|X| x K) and, when recorded, the head weights (K x M).
struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<Matrix> weights;
  std::vector<std::pair<std::string, std::string>> meta;

  void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }
  void add_meta(std::string key, double value);
};

/// Shared representation with M linear heads. Column m of `weights` is w^m.
/// When `cumulants` is set, column m replaces R^pi as the reward of head m.
struct EnsembleState {
  Matrix phi;
  Matrix weights;
  std::optional<Matrix> cumulants;
};

/// d/dt Phi = A Phi + B.
struct LinearFlowSpec {
  Matrix a;
  Matrix b;
  Matrix phi0;
};

// Closed-form value flows. `times` must be nonnegative and strictly increasing.

/// V_t = exp(-t(I - gamma P))(V_0 - V^pi) + V^pi.
Trajectory td_value_flow(const MarkovChain& chain, const Vector& v0, const std::vector<double>& times);

/// V_t = e^{-t}(V_0 - V^pi) + V^pi.
Trajectory mc_value_flow(const MarkovChain& chain, const Vector& v0, const std::vector<double>& times);

/// V_t = exp(-t(I - (gamma P)^n))(V_0 - V^pi) + V^pi.
Trajectory nstep_value_flow(const MarkovChain& chain, int n, const Vector& v0, const std::vector<double>& times);

/// V_t = exp(t(T_lambda - I))(V_0 - V^pi) + V^pi.
Trajectory td_lambda_value_flow(const MarkovChain& chain, double lambda, const Vector& v0,
                                const std::vector<double>& times);

/// T_lambda = (1 - lambda) sum_{k>=1} lambda^{k-1} gamma^k P^k = (1 - lambda) gamma P (I - lambda gamma P)^{-1}.
Matrix td_lambda_operator(const Matrix& p, double gamma, double lambda);

// Integrated flows (classical RK4, fixed step). All throw DivergenceError
// once |Phi|_F exceeds kDivergenceNorm.

/// dPhi = alpha (R + gamma P Phi w - Phi w) w^T, dw = beta Phi^T (R + gamma P Phi w - Phi w).
Trajectory joint_flow(const MarkovChain& chain, const Matrix& phi0, const Vector& w0, double alpha, double beta,
                      const std::vector<double>& times, double step = kDefaultStep);

/// M-head version of joint_flow; per-head rewards come from state0.cumulants
/// when present. beta = 0 keeps the weights fixed.
Trajectory ensemble_flow(const MarkovChain& chain, const EnsembleState& state0, double alpha, double beta,
                         const std::vector<double>& times, double step = kDefaultStep, bool record_weights = true);

/// Ensemble flow whose heads are split into L = chains.size() contiguous
/// equal blocks; block l bootstraps with chain l (policy or discount).
/// M must be divisible by L.
Trajectory multi_task_ensemble_flow(const std::vector<MarkovChain>& chains, const EnsembleState& state0, double alpha,
                                    double beta, const std::vector<double>& times, double step = kDefaultStep,
                                    bool record_weights = true);

/// Block index (0-based) of head m when M heads are split across L tasks.
int task_of_head(int m, int heads, int tasks);

/// Generic fixed-step RK4 for dX/dt = f(X) with X(0) = x0, reporting X at
/// each requested time. Every interval is split into equal substeps no
/// longer than `step`, so output times are hit exactly.
Trajectory integrate_rk4(const Matrix& x0, const std::function<Matrix(const Matrix&)>& rhs,
                         const std::vector<double>& times, double step = kDefaultStep);

// Sampling. Deterministic given the seed.

/// K x M matrix with i.i.d. N(0, variance) entries; column m is w^m.
Matrix sample_weights(int heads, int k, double variance, std::uint64_t seed);

/// |X| x M matrix whose columns are i.i.d. N(0, sigma).
Matrix sample_cumulants(int heads, const Matrix& sigma, std::uint64_t seed);

/// |X| x K Gaussian features with i.i.d. N(0, 1/|X|) entries.
Matrix sample_features(Eigen::Index n_states, int k, std::uint64_t seed);

// Limits.

/// Phi_t = exp(tA) Phi_0 + (I - exp(tA))(-A^{-1} B). Warnings about A
/// having eigenvalues with nonnegative real part go to `warnings`.
Trajectory linear_limit_flow(const LinearFlowSpec& spec, const std::vector<double>& times,
                             std::vector<std::string>* warnings = nullptr);

/// -A^{-1} B.
Matrix linear_flow_fixed_point(const LinearFlowSpec& spec);

enum class MultiTaskMode { kPolicies, kDiscounts };

/// kPolicies: -(I - gamma Pbar) with Pbar the mean transition matrix (shared
/// gamma). kDiscounts: -(I - gammabar P) with gammabar the mean discount
/// (shared P).
Matrix build_multi_task_operator(const std::vector<MarkovChain>& chains, MultiTaskMode mode);

/// Evenly spaced grid 0, dt, ..., t_max (t_max included).
std::vector<double> time_grid(double t_max, int intervals);

}  // namespace repdyn
