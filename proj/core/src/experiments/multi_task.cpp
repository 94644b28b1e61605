#include "repdyn/csv.hpp"
#include "repdyn/dynamics.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/spectral.hpp"
#include "repdyn/svg.hpp"

#include <cmath>
#include <limits>

namespace repdyn {
namespace {

// L policies on the reference chain with P(right) = l / (L - 1); a single
// policy is the uniform one. Rewards are zeroed.
std::vector<MarkovChain> policy_tasks(const Mdp& mdp, int l_count, double gamma) {
  std::vector<MarkovChain> out;
  const Eigen::Index n = mdp.n_states();
  for (int l = 0; l < l_count; ++l) {
    const double p_right = l_count == 1 ? 0.5 : static_cast<double>(l) / (l_count - 1);
    Matrix probs(n, 2);
    probs.col(kLeft).setConstant(1.0 - p_right);
    probs.col(kRight).setConstant(p_right);
    out.push_back(induce(mdp, Policy(probs), gamma).with_reward(Vector::Zero(n)));
  }
  return out;
}

// Uniform policy under L discounts evenly spaced in [0.8, 0.95].
std::vector<MarkovChain> discount_tasks(const Mdp& mdp, int l_count, double gamma) {
  std::vector<MarkovChain> out;
  const MarkovChain base = induce(mdp, Policy::uniform(mdp.n_states(), 2), gamma).with_reward(Vector::Zero(mdp.n_states()));
  for (int l = 0; l < l_count; ++l) {
    out.push_back(l_count == 1 ? base : base.with_gamma(0.8 + 0.15 * l / (l_count - 1)));
  }
  return out;
}

double max_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) gap = std::max(gap, (a.states[i] - b.states[i]).norm());
  return gap;
}

}  // namespace

std::vector<Param> MultiTaskConfig::params() {
  return {{"seed", &seed},
          {"mode", &mode},
          {"L", &l},
          {"M", &m},
          {"K", &k},
          {"gamma", &gamma},
          {"t_max", &t_max},
          {"intervals", &intervals},
          {"step", &step},
          {"limit_time", &limit_time},
          {"gap_tol", &gap_tol},
          {"limit_tol", &limit_tol},
          {"separation", &separation},
          {"block_orthogonal", &block_orthogonal},
          {"block_time", &block_time}};
}

ReportBundle run_multi_task(MultiTaskConfig c) {
  if (c.mode != "policies" && c.mode != "discounts") {
    throw ConfigurationError("multi-task: mode must be 'policies' or 'discounts'");
  }
  if (c.l < 1 || c.m < 1 || c.m % c.l != 0) throw ConfigurationError("multi-task: need L >= 1 and M divisible by L");
  ReportBundle bundle;
  bundle.name = "multi-task";
  bundle.config = make_record(c.params());

  const Mdp mdp = build_reference_chain();
  const Eigen::Index n = mdp.n_states();
  if (c.k < 1 || c.k > n) throw ConfigurationError("multi-task: K must lie in [1, |X|]");
  const MultiTaskMode mode = c.mode == "policies" ? MultiTaskMode::kPolicies : MultiTaskMode::kDiscounts;
  const std::vector<MarkovChain> tasks =
      mode == MultiTaskMode::kPolicies ? policy_tasks(mdp, c.l, c.gamma) : discount_tasks(mdp, c.l, c.gamma);
  const Matrix op = build_multi_task_operator(tasks, mode);
  Matrix mean_p = Matrix::Zero(n, n);
  for (const auto& t : tasks) mean_p += t.transition() / static_cast<double>(tasks.size());

  const std::vector<double> times = time_grid(c.t_max, c.intervals);
  const Matrix phi0 = sample_features(n, c.k, derive_seed(c.seed, 0));
  const EnsembleState state{phi0, sample_weights(c.m, c.k, 1.0 / c.m, derive_seed(c.seed, 1)), std::nullopt};
  const Trajectory finite = multi_task_ensemble_flow(tasks, state, 1.0, 0.0, times, c.step, false);
  const Trajectory limit = linear_limit_flow({op, Matrix::Zero(n, c.k), phi0}, times);

  Matrix gaps(static_cast<Eigen::Index>(times.size()), 2);
  for (std::size_t i = 0; i < times.size(); ++i) {
    gaps.row(static_cast<Eigen::Index>(i)) << times[i], (finite.states[i] - limit.states[i]).norm();
  }
  bundle.add_table("trajectory_gap", matrix_to_csv(gaps, {"t", "frobenius_gap"}));
  bundle.add_check("finite_M_matches_averaged_limit", gaps.col(1).maxCoeff(), "<", c.gap_tol, "trajectory_gap");

  // Subspace reached by the limit flow versus the EBFs of the averaged chain.
  const Trajectory late = linear_limit_flow({op, Matrix::Zero(n, c.k), phi0}, {c.limit_time});
  const Subspace reached = orthonormalize(late.states.back());
  const Subspace averaged = ebf(mean_p, c.k);
  const Subspace first = ebf(tasks.front().transition(), c.k);
  const double to_mean = grassmann_distance(reached, averaged).distance;
  const double to_first = grassmann_distance(reached, first).distance;
  const double mean_vs_first = grassmann_distance(averaged, first).distance;
  Matrix sub(1, 3);
  sub << to_mean, to_first, mean_vs_first;
  bundle.add_table("limit_subspace", matrix_to_csv(sub, {"limit_vs_ebf_mean_P", "limit_vs_ebf_task0_P",
                                                         "ebf_mean_P_vs_ebf_task0_P"}));
  bundle.add_check("limit_subspace_is_ebf_of_mean", to_mean, "<", c.limit_tol, "limit_subspace");
  if (mode == MultiTaskMode::kPolicies && c.l >= 2) {
    bundle.add_check("mean_ebf_differs_from_task0_ebf", mean_vs_first, ">", c.separation, "limit_subspace");
  }

  if (c.l == 1) {
    const Trajectory single = ensemble_flow(tasks.front(), state, 1.0, 0.0, times, c.step, false);
    Matrix t(1, 1);
    t << max_gap(single, finite);
    bundle.add_table("l1_reduction", matrix_to_csv(t, {"max_difference"}));
    bundle.add_check("l1_equals_single_task_ensemble", t(0, 0), "<", 1e-12, "l1_reduction");
  }

  if (c.block_orthogonal && c.k % c.l == 0) {
    // Heads of task l only touch feature block l, so each block should
    // follow its own task operator.
    const int width = c.k / c.l;
    const int per_task = c.m / c.l;
    Matrix w = Matrix::Zero(c.k, c.m);
    const Matrix draws = sample_weights(per_task, width * c.l, static_cast<double>(c.l) / c.m, derive_seed(c.seed, 2));
    for (int l = 0; l < c.l; ++l) {
      w.block(l * width, l * per_task, width, per_task) = draws.block(l * width, 0, width, per_task);
    }
    const Trajectory blocks =
        multi_task_ensemble_flow(tasks, {phi0, w, std::nullopt}, 1.0, 0.0, {c.block_time}, c.step, false);
    Matrix report(c.l, 3);
    for (int l = 0; l < c.l; ++l) {
      report.row(l) << l, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN();
      try {
        const Subspace s = orthonormalize(blocks.states.back().middleCols(l * width, width));
        report(l, 1) = grassmann_distance(s, ebf(tasks[static_cast<std::size_t>(l)].transition(), width)).distance;
        report(l, 2) = grassmann_distance(s, ebf(mean_p, width)).distance;
      } catch (const RankError&) {
        // The block collapsed to lower rank by block_time; reported as NaN.
      }
    }
    bundle.add_table("block_orthogonal", "# block_time=" + format_double(c.block_time) + "\n" +
                                             matrix_to_csv(report, {"block", "vs_own_task_ebf", "vs_mean_ebf"}));
  }

  SvgOptions opts;
  opts.title = "|Phi^M_t - Phi^limit_t|_F";
  opts.series_labels = {"gap"};
  bundle.add_figure("trajectory_gap", emit_svg(gaps, PlotKind::kLine, opts));
  return bundle;
}

}  // namespace repdyn
