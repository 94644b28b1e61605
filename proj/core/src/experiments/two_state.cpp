#include "repdyn/csv.hpp"
#include "repdyn/dynamics.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/spectral.hpp"
#include "repdyn/svg.hpp"

#include <cmath>

namespace repdyn {

std::vector<Param> TwoStateConfig::params() {
  return {{"seed", &seed},         {"stay_a", &stay_a},       {"stay_b", &stay_b},
          {"reward_a", &reward_a}, {"reward_b", &reward_b},   {"gamma", &gamma},
          {"v0_a", &v0_a},         {"v0_b", &v0_b},           {"t_max", &t_max},
          {"intervals", &intervals}, {"mc_line_tol", &mc_line_tol}, {"td_angle_tol", &td_angle_tol},
          {"endpoint_tol", &endpoint_tol}};
}

ReportBundle run_two_state(TwoStateConfig c) {
  ReportBundle bundle;
  bundle.name = "two-state";
  bundle.config = make_record(c.params());

  const auto [mdp, policy] = build_two_state_mdp(c.stay_a, c.stay_b, Eigen::Vector2d(c.reward_a, c.reward_b));
  const MarkovChain chain = induce(mdp, policy, c.gamma);
  const Vector v_pi = exact_value(chain);
  const Vector v0 = Eigen::Vector2d(c.v0_a, c.v0_b);
  const std::vector<double> times = time_grid(c.t_max, c.intervals);
  const Trajectory td = td_value_flow(chain, v0, times);
  const Trajectory mc = mc_value_flow(chain, v0, times);

  Matrix table(static_cast<Eigen::Index>(times.size()), 5);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    table.row(r) << times[i], td.states[i](0, 0), td.states[i](1, 0), mc.states[i](0, 0), mc.states[i](1, 0);
  }
  bundle.add_table("trajectories", matrix_to_csv(table, {"t", "td_v0", "td_v1", "mc_v0", "mc_v1"}));

  // MC: distance of every point from the line through V_0 and V^pi.
  const Vector dir = v0 - v_pi;
  double mc_deviation = 0.0;
  if (dir.norm() > 0.0) {
    const Vector unit = dir.normalized();
    for (const auto& s : mc.states) {
      const Vector d = s.col(0) - v_pi;
      mc_deviation = std::max(mc_deviation, (d - unit * unit.dot(d)).norm());
    }
  }
  // TD: late-time displacement direction versus the top eigenvector.
  const Subspace u1 = ebf(chain.transition(), 1);
  const Vector td_final = td.states.back().col(0) - v_pi;
  const double td_angle = td_final.norm() > 0.0 ? vector_subspace_angle(td_final, u1) : 0.0;
  const double td_end = (td.states.back().col(0) - v_pi).lpNorm<Eigen::Infinity>();
  const double mc_end = (mc.states.back().col(0) - v_pi).lpNorm<Eigen::Infinity>();

  Matrix summary(1, 6);
  summary << v_pi(0), v_pi(1), mc_deviation, td_angle, td_end, mc_end;
  bundle.add_table("summary", matrix_to_csv(summary, {"v_pi_0", "v_pi_1", "mc_line_deviation", "td_final_angle_u1",
                                                      "td_endpoint_error", "mc_endpoint_error"}));
  bundle.add_check("mc_path_collinear", mc_deviation, "<", c.mc_line_tol, "summary");
  bundle.add_check("td_aligns_with_u1", td_angle, "<", c.td_angle_tol, "summary");
  bundle.add_check("td_reaches_v_pi", td_end, "<", c.endpoint_tol, "summary");
  bundle.add_check("mc_reaches_v_pi", mc_end, "<", c.endpoint_tol, "summary");

  SvgOptions td_opts;
  td_opts.title = "TD value path (x: V(a), y: V(b))";
  td_opts.series_labels = {"TD"};
  bundle.add_figure("td_value_plane", emit_svg(table.middleCols(1, 2), PlotKind::kLine, td_opts));
  SvgOptions mc_opts;
  mc_opts.title = "MC value path (x: V(a), y: V(b))";
  mc_opts.series_labels = {"MC"};
  bundle.add_figure("mc_value_plane", emit_svg(table.middleCols(3, 2), PlotKind::kLine, mc_opts));
  return bundle;
}

}  // namespace repdyn
