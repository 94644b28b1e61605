#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace repdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kProbabilityTolerance = 1e-12;

/// Finite MDP with expected rewards. The kernel is stored per action:
/// transition(a)(x, x') = P(x' | x, a).
class Mdp {
 public:
  Mdp(std::vector<Matrix> kernel, Matrix reward);

  Eigen::Index n_states() const noexcept { return reward_.rows(); }
  Eigen::Index n_actions() const noexcept { return reward_.cols(); }

  const Matrix& transition(Eigen::Index action) const { return kernel_.at(action); }
  double probability(Eigen::Index x, Eigen::Index a, Eigen::Index next) const {
    return kernel_.at(a)(x, next);
  }
  /// reward()(x, a) = R(x, a).
  const Matrix& reward() const noexcept { return reward_; }

 private:
  std::vector<Matrix> kernel_;
  Matrix reward_;
};

/// Stochastic policy, probs()(x, a) = pi(a | x).
class Policy {
 public:
  explicit Policy(Matrix probs);

  static Policy uniform(Eigen::Index n_states, Eigen::Index n_actions);
  static Policy deterministic(const std::vector<int>& actions, Eigen::Index n_actions);

  const Matrix& probs() const noexcept { return probs_; }
  Eigen::Index n_states() const noexcept { return probs_.rows(); }
  Eigen::Index n_actions() const noexcept { return probs_.cols(); }

  /// Action index if row x is one-hot, -1 otherwise.
  int action(Eigen::Index x) const;

  friend bool operator==(const Policy& a, const Policy& b) { return a.probs_ == b.probs_; }

 private:
  Matrix probs_;
};

/// Policy-induced chain (P^pi, R^pi, gamma).
class MarkovChain {
 public:
  MarkovChain(Matrix transition, Vector reward, double gamma);

  const Matrix& transition() const noexcept { return transition_; }
  const Vector& reward() const noexcept { return reward_; }
  double gamma() const noexcept { return gamma_; }
  Eigen::Index n_states() const noexcept { return reward_.size(); }

  MarkovChain with_reward(Vector reward) const;
  MarkovChain with_gamma(double gamma) const;

 private:
  Matrix transition_;
  Vector reward_;
  double gamma_;
};

struct PolicyIterationTrace {
  std::vector<Policy> policies;
  std::vector<Vector> values;
  bool converged = false;
};

enum ChainAction : int { kLeft = 0, kRight = 1 };

/// n-state chain; with probability `slip` a uniformly random action replaces
/// the chosen one. Moving off an end keeps the agent in place.
Mdp build_chain_mdp(int n, double slip, double left_reward, double right_reward);

/// The chain used throughout the transfer experiments: 30 states, slip 0.01,
/// +2 for left at the left end, +1 for right at the right end.
Mdp build_reference_chain();

std::pair<Mdp, Policy> build_two_state_mdp(double stay_prob_a, double stay_prob_b,
                                           const Eigen::Vector2d& rewards);

MarkovChain induce(const Mdp& mdp, const Policy& policy, double gamma);

Vector exact_value(const MarkovChain& chain);

/// Greedy deterministic policy; ties go to the lowest action index.
Policy greedy_policy(const Mdp& mdp, const Vector& value, double gamma);

PolicyIterationTrace policy_iteration(const Mdp& mdp, double gamma, int max_iters, const Policy& init);

/// {n_states, n_actions, kernel, reward}; kernel is row-major [x][a][x'],
/// reward is [x][a].
std::string mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(std::string_view text);

}  // namespace repdyn
