#include "repdyn/mdp.hpp"

#include "repdyn/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace repdyn {
namespace {

void require_stochastic_rows(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ConfigurationError(std::string(what) + ": non-finite entry");
  if ((m.array() < 0.0).any()) throw ConfigurationError(std::string(what) + ": negative probability");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double sum = m.row(r).sum();
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      std::ostringstream os;
      os << what << ": row " << r << " sums to " << sum;
      throw ConfigurationError(os.str());
    }
  }
}

}  // namespace

Mdp::Mdp(std::vector<Matrix> kernel, Matrix reward)
    : kernel_(std::move(kernel)), reward_(std::move(reward)) {
  if (reward_.rows() < 1 || reward_.cols() < 1) throw ConfigurationError("Mdp: empty state or action set");
  if (static_cast<Eigen::Index>(kernel_.size()) != reward_.cols()) {
    throw ConfigurationError("Mdp: kernel has " + std::to_string(kernel_.size()) +
                             " actions but reward has " + std::to_string(reward_.cols()));
  }
  if (!reward_.allFinite()) throw ConfigurationError("Mdp: non-finite reward");
  for (const Matrix& pa : kernel_) {
    if (pa.rows() != reward_.rows() || pa.cols() != reward_.rows()) {
      throw ConfigurationError("Mdp: kernel block is not |X| x |X|");
    }
    require_stochastic_rows(pa, "Mdp kernel");
  }
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) throw ConfigurationError("Policy: empty");
  require_stochastic_rows(probs_, "Policy");
}

Policy Policy::uniform(Eigen::Index n_states, Eigen::Index n_actions) {
  return Policy(Matrix::Constant(n_states, n_actions, 1.0 / static_cast<double>(n_actions)));
}

Policy Policy::deterministic(const std::vector<int>& actions, Eigen::Index n_actions) {
  Matrix probs = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
  for (std::size_t x = 0; x < actions.size(); ++x) {
    if (actions[x] < 0 || actions[x] >= n_actions) throw ConfigurationError("Policy: action out of range");
    probs(static_cast<Eigen::Index>(x), actions[x]) = 1.0;
  }
  return Policy(std::move(probs));
}

int Policy::action(Eigen::Index x) const {
  for (Eigen::Index a = 0; a < probs_.cols(); ++a) {
    if (probs_(x, a) == 1.0) return static_cast<int>(a);
  }
  return -1;
}

MarkovChain::MarkovChain(Matrix transition, Vector reward, double gamma)
    : transition_(std::move(transition)), reward_(std::move(reward)), gamma_(gamma) {
  if (transition_.rows() != transition_.cols() || transition_.rows() != reward_.size()) {
    throw ConfigurationError("MarkovChain: dimension mismatch");
  }
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw ConfigurationError("MarkovChain: gamma must lie in [0, 1)");
  if (!reward_.allFinite()) throw ConfigurationError("MarkovChain: non-finite reward");
  require_stochastic_rows(transition_, "MarkovChain transition");
}

MarkovChain MarkovChain::with_reward(Vector reward) const {
  return MarkovChain(transition_, std::move(reward), gamma_);
}

MarkovChain MarkovChain::with_gamma(double gamma) const { return MarkovChain(transition_, reward_, gamma); }

Mdp build_chain_mdp(int n, double slip, double left_reward, double right_reward) {
  if (n < 2) throw ConfigurationError("build_chain_mdp: n must be >= 2");
  if (!(slip >= 0.0 && slip <= 1.0)) throw ConfigurationError("build_chain_mdp: slip must lie in [0, 1]");

  // moves[a] is the deterministic effect of executing action a.
  std::vector<Matrix> moves(2, Matrix::Zero(n, n));
  for (int x = 0; x < n; ++x) {
    moves[kLeft](x, x > 0 ? x - 1 : x) = 1.0;
    moves[kRight](x, x < n - 1 ? x + 1 : x) = 1.0;
  }
  const Matrix random_move = 0.5 * (moves[kLeft] + moves[kRight]);
  std::vector<Matrix> kernel;
  for (int a = 0; a < 2; ++a) kernel.push_back((1.0 - slip) * moves[a] + slip * random_move);

  Matrix reward = Matrix::Zero(n, 2);
  reward(0, kLeft) = left_reward;
  reward(n - 1, kRight) = right_reward;
  return Mdp(std::move(kernel), std::move(reward));
}

Mdp build_reference_chain() { return build_chain_mdp(30, 0.01, 2.0, 1.0); }

std::pair<Mdp, Policy> build_two_state_mdp(double stay_prob_a, double stay_prob_b,
                                           const Eigen::Vector2d& rewards) {
  for (double p : {stay_prob_a, stay_prob_b}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigurationError("build_two_state_mdp: probability outside [0, 1]");
  }
  Matrix p(2, 2);
  p << stay_prob_a, 1.0 - stay_prob_a, 1.0 - stay_prob_b, stay_prob_b;
  Matrix r = rewards;
  return {Mdp({p}, r), Policy::uniform(2, 1)};
}

MarkovChain induce(const Mdp& mdp, const Policy& policy, double gamma) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
    throw ConfigurationError("induce: policy is " + std::to_string(policy.n_states()) + "x" +
                             std::to_string(policy.n_actions()) + " but MDP is " +
                             std::to_string(mdp.n_states()) + "x" + std::to_string(mdp.n_actions()));
  }
  const Eigen::Index n = mdp.n_states();
  Matrix transition = Matrix::Zero(n, n);
  for (Eigen::Index a = 0; a < mdp.n_actions(); ++a) {
    transition += policy.probs().col(a).asDiagonal() * mdp.transition(a);
  }
  Vector reward = policy.probs().cwiseProduct(mdp.reward()).rowwise().sum();
  return MarkovChain(std::move(transition), std::move(reward), gamma);
}

Vector exact_value(const MarkovChain& chain) {
  const Eigen::Index n = chain.n_states();
  const Matrix system = Matrix::Identity(n, n) - chain.gamma() * chain.transition();
  Eigen::PartialPivLU<Matrix> lu(system);
  Vector v = lu.solve(chain.reward());
  if (!v.allFinite()) throw NumericalError("exact_value: linear solve produced non-finite values");
  return v;
}

Policy greedy_policy(const Mdp& mdp, const Vector& value, double gamma) {
  if (value.size() != mdp.n_states()) throw ConfigurationError("greedy_policy: value has wrong length");
  const Eigen::Index n = mdp.n_states();
  Matrix q(n, mdp.n_actions());
  for (Eigen::Index a = 0; a < mdp.n_actions(); ++a) {
    q.col(a) = mdp.reward().col(a) + gamma * mdp.transition(a) * value;
  }
  std::vector<int> actions(static_cast<std::size_t>(n));
  for (Eigen::Index x = 0; x < n; ++x) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.cols(); ++a) {
      if (q(x, a) > q(x, best)) best = a;
    }
    actions[static_cast<std::size_t>(x)] = static_cast<int>(best);
  }
  return Policy::deterministic(actions, mdp.n_actions());
}

PolicyIterationTrace policy_iteration(const Mdp& mdp, double gamma, int max_iters, const Policy& init) {
  if (max_iters < 1) throw ConfigurationError("policy_iteration: max_iters must be >= 1");
  PolicyIterationTrace trace;
  Policy current = init;
  for (int iter = 0; iter < max_iters; ++iter) {
    Vector v = exact_value(induce(mdp, current, gamma));
    trace.policies.push_back(current);
    trace.values.push_back(v);
    Policy next = greedy_policy(mdp, v, gamma);
    if (next == current) {
      trace.converged = true;
      break;
    }
    current = std::move(next);
  }
  return trace;
}

std::string mdp_to_json(const Mdp& mdp) {
  nlohmann::ordered_json doc;
  doc["n_states"] = mdp.n_states();
  doc["n_actions"] = mdp.n_actions();
  auto kernel = nlohmann::json::array();
  auto reward = nlohmann::json::array();
  for (Eigen::Index x = 0; x < mdp.n_states(); ++x) {
    auto per_action = nlohmann::json::array();
    auto rewards = nlohmann::json::array();
    for (Eigen::Index a = 0; a < mdp.n_actions(); ++a) {
      auto row = nlohmann::json::array();
      for (Eigen::Index y = 0; y < mdp.n_states(); ++y) row.push_back(mdp.probability(x, a, y));
      per_action.push_back(std::move(row));
      rewards.push_back(mdp.reward()(x, a));
    }
    kernel.push_back(std::move(per_action));
    reward.push_back(std::move(rewards));
  }
  doc["kernel"] = std::move(kernel);
  doc["reward"] = std::move(reward);
  return doc.dump();
}

Mdp mdp_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    const auto n = doc.at("n_states").get<Eigen::Index>();
    const auto na = doc.at("n_actions").get<Eigen::Index>();
    if (n < 1 || na < 1) throw ConfigurationError("mdp_from_json: empty state or action set");
    const auto& kernel = doc.at("kernel");
    const auto& reward = doc.at("reward");
    if (static_cast<Eigen::Index>(kernel.size()) != n || static_cast<Eigen::Index>(reward.size()) != n) {
      throw ConfigurationError("mdp_from_json: array length does not match n_states");
    }
    std::vector<Matrix> blocks(static_cast<std::size_t>(na), Matrix::Zero(n, n));
    Matrix r(n, na);
    for (Eigen::Index x = 0; x < n; ++x) {
      if (static_cast<Eigen::Index>(kernel[x].size()) != na || static_cast<Eigen::Index>(reward[x].size()) != na) {
        throw ConfigurationError("mdp_from_json: array length does not match n_actions");
      }
      for (Eigen::Index a = 0; a < na; ++a) {
        const auto& row = kernel[x][a];
        if (static_cast<Eigen::Index>(row.size()) != n) throw ConfigurationError("mdp_from_json: ragged kernel row");
        for (Eigen::Index y = 0; y < n; ++y) blocks[a](x, y) = row[y].get<double>();
        r(x, a) = reward[x][a].get<double>();
      }
    }
    return Mdp(std::move(blocks), std::move(r));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("mdp_from_json: ") + e.what());
  }
}

}  // namespace repdyn
