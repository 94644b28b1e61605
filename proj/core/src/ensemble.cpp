#include "repdyn/dynamics.hpp"

#include "repdyn/errors.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/spectral.hpp"
#include "rk4.hpp"

#include <cmath>

namespace repdyn {
namespace {

// Stream indices keep the draws for different quantities independent even
// when they share a seed.
constexpr std::uint64_t kWeightStream = 1;
constexpr std::uint64_t kCumulantStream = 2;
constexpr std::uint64_t kFeatureStream = 3;

struct HeadGroup {
  Eigen::Index first;
  Eigen::Index count;
  Matrix discounted;  // gamma_l P_l
  Vector reward;      // used when no cumulants are given
};

struct FlowState {
  Matrix phi;
  Matrix w;

  FlowState& operator+=(const FlowState& o) {
    phi += o.phi;
    w += o.w;
    return *this;
  }
  friend FlowState operator*(double s, const FlowState& x) { return {s * x.phi, s * x.w}; }
};

[[maybe_unused]] void axpy(FlowState& out, const FlowState& x, double h, const FlowState& k) {
  out.phi.noalias() = x.phi + h * k.phi;
  out.w.noalias() = x.w + h * k.w;
}

[[maybe_unused]] double divergence_norm(const FlowState& x) { return x.phi.norm(); }

Trajectory run_groups(const std::vector<HeadGroup>& groups, const EnsembleState& s0, double alpha, double beta,
                      const std::vector<double>& times, double step, bool record_weights) {
  const Eigen::Index n = s0.phi.rows();
  const Eigen::Index k = s0.phi.cols();
  const Eigen::Index heads = s0.weights.cols();
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigurationError("ensemble_flow: alpha and beta must be >= 0");
  if (s0.weights.rows() != k || heads < 1) throw ConfigurationError("ensemble_flow: weights must be K x M, M >= 1");
  if (s0.cumulants && (s0.cumulants->rows() != n || s0.cumulants->cols() != heads)) {
    throw ConfigurationError("ensemble_flow: cumulants must be |X| x M");
  }
  auto head_rewards = [&](const HeadGroup& g) -> Matrix {
    if (s0.cumulants) return s0.cumulants->middleCols(g.first, g.count);
    return g.reward.replicate(1, g.count);
  };

  Trajectory out;
  auto record_matrix = [&](double t, const Matrix& phi) {
    out.times.push_back(t);
    out.states.push_back(phi);
    if (record_weights) out.weights.push_back(s0.weights);
  };

  if (beta == 0.0 && heads > k) {
    // Fixed weights: the right-hand side only depends on the per-group Gram
    // matrices W_l W_l^T and forcing terms C_l W_l^T.
    struct Reduced {
      Matrix op;  // gamma_l P_l - I
      Matrix gram;
      Matrix forcing;
    };
    std::vector<Reduced> reduced;
    Matrix forcing = Matrix::Zero(n, k);
    for (const auto& g : groups) {
      const auto w = s0.weights.middleCols(g.first, g.count);
      Reduced r{g.discounted - Matrix::Identity(n, n), w * w.transpose(), head_rewards(g) * w.transpose()};
      forcing += r.forcing;
      reduced.push_back(std::move(r));
    }
    auto rhs = [&](const Matrix& phi) {
      Matrix d = forcing;
      for (const auto& r : reduced) d.noalias() += r.op * (phi * r.gram);
      return Matrix(alpha * d);
    };
    detail::rk4_run(s0.phi, rhs, times, step, kDivergenceNorm, record_matrix);
  } else {
    std::vector<Matrix> rewards;
    for (const auto& g : groups) rewards.push_back(head_rewards(g));
    auto rhs = [&](const FlowState& x) {
      FlowState d{Matrix::Zero(n, k), Matrix::Zero(k, heads)};
      for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        const auto w = x.w.middleCols(g.first, g.count);
        const Matrix v = x.phi * w;
        const Matrix delta = rewards[i] + g.discounted * v - v;
        d.phi.noalias() += alpha * delta * w.transpose();
        if (beta != 0.0) d.w.middleCols(g.first, g.count).noalias() = beta * x.phi.transpose() * delta;
      }
      return d;
    };
    detail::rk4_run(FlowState{s0.phi, s0.weights}, rhs, times, step, kDivergenceNorm,
                    [&](double t, const FlowState& x) {
                      out.times.push_back(t);
                      out.states.push_back(x.phi);
                      if (record_weights) out.weights.push_back(x.w);
                    });
  }
  out.add_meta("alpha", alpha);
  out.add_meta("beta", beta);
  out.add_meta("M", static_cast<double>(heads));
  out.add_meta("K", static_cast<double>(k));
  out.add_meta("step", step);
  return out;
}

}  // namespace

Trajectory ensemble_flow(const MarkovChain& chain, const EnsembleState& state0, double alpha, double beta,
                         const std::vector<double>& times, double step, bool record_weights) {
  detail::validate_times(times, "ensemble_flow");
  if (state0.phi.rows() != chain.n_states()) throw ConfigurationError("ensemble_flow: Phi_0 must have |X| rows");
  const std::vector<HeadGroup> groups{
      {0, state0.weights.cols(), chain.gamma() * chain.transition(), chain.reward()}};
  Trajectory out = run_groups(groups, state0, alpha, beta, times, step, record_weights);
  out.meta.insert(out.meta.begin(), {"flow", state0.cumulants ? "rc" : "ensemble"});
  out.add_meta("gamma", chain.gamma());
  return out;
}

int task_of_head(int m, int heads, int tasks) {
  if (tasks < 1 || heads < 1 || heads % tasks != 0) {
    throw ConfigurationError("task_of_head: M=" + std::to_string(heads) + " is not divisible by L=" +
                             std::to_string(tasks));
  }
  if (m < 0 || m >= heads) throw ConfigurationError("task_of_head: head index out of range");
  return m / (heads / tasks);
}

Trajectory multi_task_ensemble_flow(const std::vector<MarkovChain>& chains, const EnsembleState& state0, double alpha,
                                    double beta, const std::vector<double>& times, double step, bool record_weights) {
  detail::validate_times(times, "multi_task_ensemble_flow");
  if (chains.empty()) throw ConfigurationError("multi_task_ensemble_flow: no tasks");
  const auto heads = static_cast<int>(state0.weights.cols());
  const auto tasks = static_cast<int>(chains.size());
  if (heads % tasks != 0) {
    throw ConfigurationError("multi_task_ensemble_flow: M=" + std::to_string(heads) + " is not divisible by L=" +
                             std::to_string(tasks));
  }
  const int block = heads / tasks;
  std::vector<HeadGroup> groups;
  for (int l = 0; l < tasks; ++l) {
    const auto& c = chains[static_cast<std::size_t>(l)];
    if (c.n_states() != state0.phi.rows()) throw ConfigurationError("multi_task_ensemble_flow: |X| mismatch");
    groups.push_back({static_cast<Eigen::Index>(l) * block, block, c.gamma() * c.transition(), c.reward()});
  }
  Trajectory out = run_groups(groups, state0, alpha, beta, times, step, record_weights);
  out.meta.insert(out.meta.begin(), {"flow", "multi_task"});
  out.add_meta("L", static_cast<double>(tasks));
  return out;
}

Matrix sample_weights(int heads, int k, double variance, std::uint64_t seed) {
  if (heads < 1 || k < 1) throw ConfigurationError("sample_weights: M and K must be >= 1");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw ConfigurationError("sample_weights: variance must be > 0");
  Rng rng = make_stream(seed, kWeightStream);
  return normal_matrix(rng, k, heads, std::sqrt(variance));
}

Matrix sample_cumulants(int heads, const Matrix& sigma, std::uint64_t seed) {
  if (heads < 1) throw ConfigurationError("sample_cumulants: M must be >= 1");
  const Matrix root = psd_sqrt(sigma);
  Rng rng = make_stream(seed, kCumulantStream);
  return root * normal_matrix(rng, sigma.rows(), heads);
}

Matrix sample_features(Eigen::Index n_states, int k, std::uint64_t seed) {
  if (n_states < 1 || k < 1) throw ConfigurationError("sample_features: |X| and K must be >= 1");
  Rng rng = make_stream(seed, kFeatureStream);
  return normal_matrix(rng, n_states, k, 1.0 / std::sqrt(static_cast<double>(n_states)));
}

}  // namespace repdyn
