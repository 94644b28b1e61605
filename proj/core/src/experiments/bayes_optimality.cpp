#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/spectral.hpp"
#include "repdyn/svg.hpp"

#include <cmath>

namespace repdyn {
namespace {

// Tr(Psi^T P_S Psi) = |B^T Psi|_F^2 for an orthonormal basis B of S.
double captured(const Subspace& s, const Matrix& psi) { return (s.basis().transpose() * psi).squaredNorm(); }

}  // namespace

std::vector<Param> BayesOptimalityConfig::params() {
  return {{"seed", &seed},
          {"K", &k},
          {"gamma", &gamma},
          {"n_random_subspaces", &n_random_subspaces},
          {"mc_samples", &mc_samples},
          {"mc_sigmas", &mc_sigmas}};
}

ReportBundle run_bayes_optimality(BayesOptimalityConfig c) {
  if (c.n_random_subspaces < 1 || c.mc_samples < 2) {
    throw ConfigurationError("bayes-opt: need n_random_subspaces >= 1 and mc_samples >= 2");
  }
  ReportBundle bundle;
  bundle.name = "bayes-opt";
  bundle.config = make_record(c.params());

  const Mdp mdp = build_reference_chain();
  const MarkovChain chain = induce(mdp, Policy::uniform(mdp.n_states(), mdp.n_actions()), c.gamma);
  const Eigen::Index n = chain.n_states();
  if (c.k < 1 || c.k > n) throw ConfigurationError("bayes-opt: K must lie in [1, |X|]");
  const Matrix psi = resolvent(chain.transition(), c.gamma);
  const Matrix identity = Matrix::Identity(n, n);
  const double total = psi.squaredNorm();

  const Subspace best = rsbf(chain.transition(), c.gamma, c.k, identity);
  const double best_trace = captured(best, psi);

  Rng rng = make_stream(c.seed, 1);
  Matrix random_traces(c.n_random_subspaces, 1);
  int violations = 0;
  for (int i = 0; i < c.n_random_subspaces; ++i) {
    const double t = captured(orthonormalize(normal_matrix(rng, n, c.k)), psi);
    random_traces(i, 0) = t;
    if (t > best_trace) ++violations;
  }
  bundle.add_table("random_traces", "# rsbf_trace=" + format_double(best_trace) + "\n" +
                                        matrix_to_csv(random_traces, {"random_subspace_trace"}));
  bundle.add_check("rsbf_trace_beats_random", violations, "==", 0.0, "random_traces");

  // E_r |P_{S^perp} Psi r|^2 for r ~ N(0, I) equals Tr(Psi^T Psi) - Tr(Psi^T P_S Psi).
  const Matrix complement = identity - best.projector();
  Rng mc_rng = make_stream(c.seed, 2);
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < c.mc_samples; ++i) {
    const Matrix r = normal_matrix(mc_rng, n, 1);
    const double e = (complement * (psi * r)).squaredNorm();
    const double delta = e - mean;
    mean += delta / (i + 1);
    m2 += delta * (e - mean);
  }
  const double stderr_mc = std::sqrt(m2 / (c.mc_samples - 1) / c.mc_samples);
  const double expected = total - best_trace;
  const double z = std::abs(mean - expected) / stderr_mc;

  const Subspace full = orthonormalize(identity);
  const double full_error = std::abs(total - captured(full, psi)) / total;

  Matrix summary(1, 7);
  summary << best_trace, random_traces.maxCoeff(), expected, mean, stderr_mc, z, full_error;
  bundle.add_table("summary", matrix_to_csv(summary, {"rsbf_trace", "best_random_trace", "expected_error",
                                                      "monte_carlo_error", "monte_carlo_stderr", "z_score",
                                                      "full_space_relative_error"}));
  bundle.add_check("monte_carlo_matches_trace_identity", z, "<=", c.mc_sigmas, "summary");
  bundle.add_check("full_space_projection_error_zero", full_error, "<", 1e-12, "summary");

  Matrix hist(c.n_random_subspaces, 2);
  for (int i = 0; i < c.n_random_subspaces; ++i) hist.row(i) << i, random_traces(i, 0);
  SvgOptions opts;
  opts.title = "Tr(Psi^T P_S Psi) of random subspaces (RSBF: " + format_double(best_trace) + ")";
  opts.series_labels = {"random"};
  bundle.add_figure("random_traces", emit_svg(hist, PlotKind::kLine, opts));
  return bundle;
}

}  // namespace repdyn
