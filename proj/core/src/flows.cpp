#include "repdyn/dynamics.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/linalg.hpp"
#include "rk4.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace repdyn {

void Trajectory::add_meta(std::string key, double value) { add_meta(std::move(key), format_double(value)); }

namespace detail {

void validate_times(const std::vector<double>& times, const char* who) {
  if (times.empty()) throw ConfigurationError(std::string(who) + ": no output times");
  if (!(times.front() >= 0.0)) throw ConfigurationError(std::string(who) + ": times must be nonnegative");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw ConfigurationError(std::string(who) + ": non-finite time");
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ConfigurationError(std::string(who) + ": times must be strictly increasing");
    }
  }
}

}  // namespace detail

namespace {

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

void check_vector(const MarkovChain& chain, const Vector& v0, const char* who) {
  if (v0.size() != chain.n_states()) {
    throw ConfigurationError(std::string(who) + ": V_0 has length " + std::to_string(v0.size()) + ", expected " +
                             std::to_string(chain.n_states()));
  }
  if (!v0.allFinite()) throw ConfigurationError(std::string(who) + ": V_0 is not finite");
}

// V_t = exp(t G)(V_0 - V_inf) + V_inf for a fixed generator G.
Trajectory generator_flow(const Matrix& generator, const Vector& v0, const Vector& v_inf,
                          const std::vector<double>& times) {
  Trajectory out;
  const Vector offset = v0 - v_inf;
  for (double t : times) {
    out.times.push_back(t);
    if (t == 0.0) {
      out.states.emplace_back(v0);
    } else {
      out.states.emplace_back(matrix_exponential(generator, t) * offset + v_inf);
    }
  }
  return out;
}

void add_chain_meta(Trajectory& traj, const char* flow, const MarkovChain& chain) {
  traj.add_meta("flow", flow);
  traj.add_meta("gamma", chain.gamma());
  traj.add_meta("n_states", static_cast<double>(chain.n_states()));
}

}  // namespace

Trajectory td_value_flow(const MarkovChain& chain, const Vector& v0, const std::vector<double>& times) {
  detail::validate_times(times, "td_value_flow");
  check_vector(chain, v0, "td_value_flow");
  const Eigen::Index n = chain.n_states();
  const Matrix generator = chain.gamma() * chain.transition() - Matrix::Identity(n, n);
  Trajectory out = generator_flow(generator, v0, exact_value(chain), times);
  add_chain_meta(out, "td", chain);
  return out;
}

Trajectory mc_value_flow(const MarkovChain& chain, const Vector& v0, const std::vector<double>& times) {
  detail::validate_times(times, "mc_value_flow");
  check_vector(chain, v0, "mc_value_flow");
  const Vector v_pi = exact_value(chain);
  const Vector offset = v0 - v_pi;
  Trajectory out;
  for (double t : times) {
    out.times.push_back(t);
    out.states.emplace_back(t == 0.0 ? Vector(v0) : Vector(std::exp(-t) * offset + v_pi));
  }
  add_chain_meta(out, "mc", chain);
  return out;
}

Trajectory nstep_value_flow(const MarkovChain& chain, int n, const Vector& v0, const std::vector<double>& times) {
  if (n < 1) throw ConfigurationError("nstep_value_flow: n must be >= 1");
  detail::validate_times(times, "nstep_value_flow");
  check_vector(chain, v0, "nstep_value_flow");
  const Eigen::Index size = chain.n_states();
  const Matrix discounted = chain.gamma() * chain.transition();
  Matrix power = Matrix::Identity(size, size);
  for (int i = 0; i < n; ++i) power = power * discounted;
  const Matrix generator = power - Matrix::Identity(size, size);
  Trajectory out = generator_flow(generator, v0, exact_value(chain), times);
  add_chain_meta(out, "nstep", chain);
  out.add_meta("n", static_cast<double>(n));
  return out;
}

Matrix td_lambda_operator(const Matrix& p, double gamma, double lambda) {
  if (p.rows() != p.cols()) throw ConfigurationError("td_lambda_operator: matrix must be square");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigurationError("td_lambda_operator: lambda must lie in [0, 1)");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigurationError("td_lambda_operator: gamma must lie in [0, 1)");
  const Eigen::Index n = p.rows();
  const Matrix system = Matrix::Identity(n, n) - lambda * gamma * p;
  // (1 - lambda) gamma P (I - lambda gamma P)^{-1}; both factors commute.
  return (1.0 - lambda) * gamma * Eigen::PartialPivLU<Matrix>(system).solve(p);
}

Trajectory td_lambda_value_flow(const MarkovChain& chain, double lambda, const Vector& v0,
                                const std::vector<double>& times) {
  detail::validate_times(times, "td_lambda_value_flow");
  check_vector(chain, v0, "td_lambda_value_flow");
  const Eigen::Index n = chain.n_states();
  const Matrix generator = td_lambda_operator(chain.transition(), chain.gamma(), lambda) - Matrix::Identity(n, n);
  Trajectory out = generator_flow(generator, v0, exact_value(chain), times);
  add_chain_meta(out, "tdlambda", chain);
  out.add_meta("lambda", lambda);
  return out;
}

Trajectory joint_flow(const MarkovChain& chain, const Matrix& phi0, const Vector& w0, double alpha, double beta,
                      const std::vector<double>& times, double step) {
  detail::validate_times(times, "joint_flow");
  if (phi0.rows() != chain.n_states() || phi0.cols() != w0.size()) {
    throw ConfigurationError("joint_flow: Phi_0 must be |X| x K and w_0 of length K");
  }
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigurationError("joint_flow: alpha and beta must be >= 0");
  const Matrix discounted = chain.gamma() * chain.transition();
  const Vector& reward = chain.reward();
  auto rhs = [&](const FlowState& x) {
    const Vector v = x.phi * x.w;
    const Vector delta = reward + discounted * v - v;
    return FlowState{alpha * delta * x.w.transpose(), beta * x.phi.transpose() * delta};
  };
  Trajectory out;
  detail::rk4_run(FlowState{phi0, w0}, rhs, times, step, kDivergenceNorm, [&](double t, const FlowState& x) {
    out.times.push_back(t);
    out.states.push_back(x.phi);
    out.weights.push_back(x.w);
  });
  add_chain_meta(out, "joint", chain);
  out.add_meta("alpha", alpha);
  out.add_meta("beta", beta);
  out.add_meta("step", step);
  return out;
}

Trajectory integrate_rk4(const Matrix& x0, const std::function<Matrix(const Matrix&)>& rhs,
                         const std::vector<double>& times, double step) {
  detail::validate_times(times, "integrate_rk4");
  Trajectory out;
  detail::rk4_run(x0, rhs, times, step, kDivergenceNorm, [&](double t, const Matrix& x) {
    out.times.push_back(t);
    out.states.push_back(x);
  });
  out.add_meta("flow", "rk4");
  out.add_meta("step", step);
  return out;
}

Matrix linear_flow_fixed_point(const LinearFlowSpec& spec) {
  const Eigen::Index n = spec.a.rows();
  if (spec.a.cols() != n || spec.b.rows() != n) throw ConfigurationError("linear flow: A must be n x n, B n x K");
  Eigen::FullPivLU<Matrix> lu(spec.a);
  if (!lu.isInvertible()) throw ConfigurationError("linear flow: A is singular, so -A^{-1}B is undefined");
  return -lu.solve(spec.b);
}

Trajectory linear_limit_flow(const LinearFlowSpec& spec, const std::vector<double>& times,
                             std::vector<std::string>* warnings) {
  detail::validate_times(times, "linear_limit_flow");
  if (spec.phi0.rows() != spec.a.rows() || spec.phi0.cols() != spec.b.cols()) {
    throw ConfigurationError("linear flow: Phi_0 and B must have the same shape");
  }
  const Matrix phi_inf = linear_flow_fixed_point(spec);
  if (warnings) {
    const double max_real = Eigen::EigenSolver<Matrix>(spec.a, false).eigenvalues().real().maxCoeff();
    if (max_real >= 0.0) {
      warnings->push_back("linear flow: A has an eigenvalue with real part " + format_double(max_real) +
                          " >= 0; the flow does not converge to -A^{-1}B");
    }
  }
  Trajectory out;
  const Matrix offset = spec.phi0 - phi_inf;
  for (double t : times) {
    out.times.push_back(t);
    out.states.emplace_back(t == 0.0 ? spec.phi0 : Matrix(matrix_exponential(spec.a, t) * offset + phi_inf));
  }
  out.add_meta("flow", "limit");
  return out;
}

Matrix build_multi_task_operator(const std::vector<MarkovChain>& chains, MultiTaskMode mode) {
  if (chains.empty()) throw ConfigurationError("build_multi_task_operator: no chains");
  const Eigen::Index n = chains.front().n_states();
  Matrix mean_p = Matrix::Zero(n, n);
  double mean_gamma = 0.0;
  for (const auto& c : chains) {
    if (c.n_states() != n) throw ConfigurationError("build_multi_task_operator: chains differ in |X|");
    if (mode == MultiTaskMode::kPolicies && c.gamma() != chains.front().gamma()) {
      throw ConfigurationError("build_multi_task_operator: policy mode needs a shared discount");
    }
    if (mode == MultiTaskMode::kDiscounts && c.transition() != chains.front().transition()) {
      throw ConfigurationError("build_multi_task_operator: discount mode needs a shared transition matrix");
    }
    mean_p += c.transition();
    mean_gamma += c.gamma();
  }
  const double l = static_cast<double>(chains.size());
  mean_p /= l;
  mean_gamma /= l;
  const Matrix identity = Matrix::Identity(n, n);
  if (mode == MultiTaskMode::kPolicies) return -(identity - chains.front().gamma() * mean_p);
  return -(identity - mean_gamma * chains.front().transition());
}

std::vector<double> time_grid(double t_max, int intervals) {
  if (!(t_max > 0.0) || intervals < 1) throw ConfigurationError("time_grid: need t_max > 0 and intervals >= 1");
  std::vector<double> out;
  for (int i = 0; i <= intervals; ++i) out.push_back(t_max * i / intervals);
  return out;
}

}  // namespace repdyn
