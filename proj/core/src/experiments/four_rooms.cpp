#include "repdyn/csv.hpp"
#include "repdyn/dynamics.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/gridworld.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/spectral.hpp"
#include "repdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace repdyn {
namespace {

struct Run {
  std::string label;
  Trajectory traj;
};

std::vector<double> output_times(const FourRoomsConfig& c) {
  std::vector<double> times;
  const int intervals = static_cast<int>(std::llround(c.t_max / c.projection_interval));
  for (int i = 0; i <= intervals; ++i) times.push_back(std::min(c.t_max, i * c.projection_interval));
  for (double t : c.snapshot_times)
    if (t >= 0.0 && t <= c.t_max) times.push_back(t);
  times.push_back(c.t_max);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

std::size_t index_of(const std::vector<double>& times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  return static_cast<std::size_t>(it - times.begin());
}

double drift(const Matrix& basis, const Matrix& phi0, const Matrix& phi_t) {
  const Matrix p0 = basis.transpose() * phi0;
  return (basis.transpose() * phi_t - p0).norm() / p0.norm();
}

}  // namespace

std::vector<Param> FourRoomsConfig::params() {
  return {{"seed", &seed},
          {"K", &k},
          {"M", &m},
          {"t_max", &t_max},
          {"beta_mode", &beta_mode},
          {"alpha", &alpha},
          {"beta", &beta},
          {"gamma", &gamma},
          {"step", &step},
          {"reference_M", &reference_m},
          {"snapshot_times", &snapshot_times},
          {"projection_interval", &projection_interval},
          {"grassmann_tol", &grassmann_tol},
          {"m1_drift_tol", &m1_drift_tol}};
}

ReportBundle run_four_rooms_features(FourRoomsConfig c) {
  if (c.beta_mode != "train" && c.beta_mode != "fix") {
    throw ConfigurationError("four-rooms: beta_mode must be 'train' or 'fix'");
  }
  if (!(c.projection_interval > 0.0)) throw ConfigurationError("four-rooms: projection_interval must be > 0");
  ReportBundle bundle;
  bundle.name = "four-rooms";
  bundle.config = make_record(c.params());

  const auto [mdp, policy] = build_four_rooms();
  const MarkovChain chain = induce(mdp, policy, c.gamma);
  const Eigen::Index n = chain.n_states();
  if (c.k < 1 || c.k > n) throw ConfigurationError("four-rooms: K must lie in [1, |X|]");

  // The uniform walk on the grid is symmetric, so its eigenvectors are real
  // and orthonormal. Order them by descending eigenvalue.
  const Matrix& p = chain.transition();
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw NumericalError("four-rooms: walk is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  const Vector eigenvalues = es.eigenvalues().reverse();
  const Matrix eigenvectors = es.eigenvectors().rowwise().reverse();
  const Subspace target = ebf(p, c.k);

  const std::vector<double> times = output_times(c);
  const Matrix phi0 = sample_features(n, c.k, derive_seed(c.seed, 0));
  auto run = [&](int heads, double beta, std::uint64_t index) {
    EnsembleState s{phi0, sample_weights(heads, c.k, 1.0 / heads, derive_seed(c.seed, index)), std::nullopt};
    return ensemble_flow(chain, s, c.alpha, beta, times, c.step, false);
  };
  const double primary_beta = c.beta_mode == "train" ? c.beta : 0.0;
  std::vector<Run> runs;
  runs.push_back({"primary", run(c.m, primary_beta, 1)});
  runs.push_back({"fixed_M" + std::to_string(c.reference_m), run(c.reference_m, 0.0, 2)});
  runs.push_back({"fixed_M1", run(1, 0.0, 3)});
  const Trajectory& primary = runs[0].traj;

  // Feature 0 snapshots.
  std::vector<double> snaps;
  for (double t : c.snapshot_times)
    if (t >= 0.0 && t <= c.t_max) snaps.push_back(t);
  Matrix snapshot_table(n, static_cast<Eigen::Index>(snaps.size()) + 1);
  std::vector<std::string> header{"state"};
  for (Eigen::Index x = 0; x < n; ++x) snapshot_table(x, 0) = static_cast<double>(x);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const Matrix& phi = primary.states[index_of(times, snaps[i])];
    snapshot_table.col(static_cast<Eigen::Index>(i) + 1) = phi.col(0);
    header.push_back("t_" + format_double(snaps[i]));
    SvgOptions opts;
    opts.title = "feature 0 at t=" + format_double(snaps[i]);
    bundle.add_figure("feature0_t" + format_double(snaps[i]), emit_svg(phi.col(0), PlotKind::kGridworld, opts));
  }
  bundle.add_table("feature0_snapshots", matrix_to_csv(snapshot_table, header));

  for (int idx : {5, static_cast<int>(n)}) {
    SvgOptions opts;
    opts.title = "eigenvector " + std::to_string(idx) + " (lambda=" + format_double(eigenvalues(idx - 1)) + ")";
    bundle.add_figure("eigenvector_" + std::to_string(idx),
                      emit_svg(eigenvectors.col(idx - 1), PlotKind::kGridworld, opts));
  }

  // Projections of every feature of the primary run onto every eigenvector.
  std::ostringstream proj;
  proj << "# run=primary\n# eigen_index is 1-based in descending eigenvalue order\n"
       << "t,feature,eigen_index,eigenvalue,dot\n";
  Matrix feature0_curves(static_cast<Eigen::Index>(times.size()), n + 1);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Matrix dots = eigenvectors.transpose() * primary.states[i];  // n x K
    feature0_curves(static_cast<Eigen::Index>(i), 0) = times[i];
    feature0_curves.row(static_cast<Eigen::Index>(i)).tail(n) = dots.col(0).transpose();
    const std::string t = format_double(times[i]);
    for (Eigen::Index f = 0; f < dots.cols(); ++f)
      for (Eigen::Index e = 0; e < n; ++e) {
        proj << t << ',' << f << ',' << e + 1 << ',' << format_double(eigenvalues(e)) << ','
             << format_double(dots(e, f)) << '\n';
      }
  }
  bundle.add_table("eigen_projection", proj.str());
  SvgOptions curve_opts;
  curve_opts.title = "feature 0 projected on eigenvectors (lambda_1 .. lambda_n)";
  for (Eigen::Index e = 0; e < n; ++e) curve_opts.series_labels.push_back("u" + std::to_string(e + 1));
  bundle.add_figure("eigen_projection_feature0", emit_svg(feature0_curves, PlotKind::kLine, curve_opts));

  // Grassmann distance to the top-K eigenvectors over time for every run.
  Matrix distances(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(runs.size()) + 1);
  std::vector<std::string> dist_header{"t"};
  for (const auto& r : runs) dist_header.push_back(r.label);
  for (std::size_t i = 0; i < times.size(); ++i) {
    distances(static_cast<Eigen::Index>(i), 0) = times[i];
    for (std::size_t j = 0; j < runs.size(); ++j) {
      double d = std::numeric_limits<double>::quiet_NaN();
      try {
        d = grassmann_distance(orthonormalize(runs[j].traj.states[i]), target).distance;
      } catch (const RankError&) {
        // Collapsed features have no K-dimensional span; recorded as NaN.
      }
      distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j) + 1) = d;
    }
  }
  bundle.add_table("grassmann_to_ebf", matrix_to_csv(distances, dist_header));

  const double d_ref = distances(distances.rows() - 1, 2);
  const double drift_ref = drift(eigenvectors, phi0, runs[1].traj.states.back());
  const double drift_m1 = drift(eigenvectors, phi0, runs[2].traj.states.back());
  const double t0_error = (primary.states.front() - sample_features(n, c.k, derive_seed(c.seed, 0))).cwiseAbs().maxCoeff();
  Matrix summary(1, 6);
  summary << t0_error, distances(distances.rows() - 1, 1), d_ref, distances(distances.rows() - 1, 3), drift_ref,
      drift_m1;
  bundle.add_table("summary", matrix_to_csv(summary, {"t0_max_abs_error", "primary_final_distance",
                                                      "reference_final_distance", "m1_final_distance",
                                                      "reference_projection_drift", "m1_projection_drift"}));
  bundle.add_check("t0_snapshot_is_initialization", t0_error, "==", 0.0, "summary");
  bundle.add_check("reference_converges_to_ebf", d_ref, "<", c.grassmann_tol, "grassmann_to_ebf");
  bundle.add_check("m1_features_stay_near_init", drift_m1, "<", c.m1_drift_tol, "summary");
  bundle.add_check("m1_drifts_less_than_reference", drift_m1 - drift_ref, "<", 0.0, "summary");

  Matrix finite = distances;
  for (Eigen::Index i = 0; i < finite.size(); ++i)
    if (!std::isfinite(finite(i))) finite(i) = 0.0;
  SvgOptions dist_opts;
  dist_opts.title = "Grassmann distance to top-K eigenvectors (NaN drawn as 0)";
  dist_opts.series_labels.assign(dist_header.begin() + 1, dist_header.end());
  bundle.add_figure("grassmann_to_ebf", emit_svg(finite, PlotKind::kLine, dist_opts));
  return bundle;
}

}  // namespace repdyn
