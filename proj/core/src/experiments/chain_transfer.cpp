#include "repdyn/csv.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/spectral.hpp"
#include "repdyn/svg.hpp"

#include <cmath>

namespace repdyn {
namespace {

// angles(j, j') = angle between V_{j'} and the features built for pi_j.
Matrix angle_table(const std::vector<Subspace>& features, const std::vector<Vector>& values) {
  const auto j = static_cast<Eigen::Index>(features.size());
  Matrix out(j, j);
  for (Eigen::Index r = 0; r < j; ++r)
    for (Eigen::Index c = 0; c < j; ++c) out(r, c) = vector_subspace_angle(values[c], features[r]);
  return out;
}

Subspace append_value(const Subspace& s, const Vector& v) {
  Matrix m(s.ambient_dim(), s.dim() + 1);
  m << s.basis(), v;
  try {
    return orthonormalize(m);
  } catch (const RankError&) {
    return s;  // v already lies in the span
  }
}

double mean_off_diagonal(const Matrix& a) {
  if (a.rows() < 2) return 0.0;
  return (a.sum() - a.trace()) / static_cast<double>(a.rows() * (a.rows() - 1));
}

bool row_monotone(const Matrix& a, Eigen::Index r) {
  constexpr double kSlack = 1e-12;
  for (Eigen::Index c = r + 1; c + 1 < a.cols(); ++c)
    if (a(r, c + 1) < a(r, c) - kSlack) return false;
  for (Eigen::Index c = r - 1; c > 0; --c)
    if (a(r, c - 1) < a(r, c) - kSlack) return false;
  return true;
}

std::vector<std::string> value_header(Eigen::Index j) {
  std::vector<std::string> h;
  for (Eigen::Index c = 0; c < j; ++c) h.push_back("v_" + std::to_string(c));
  return h;
}

}  // namespace

std::vector<Param> ChainTransferConfig::params() {
  return {{"seed", &seed},       {"K", &k},         {"gamma", &gamma},
          {"J_max", &j_max},     {"n_states", &n_states}, {"slip", &slip},
          {"with_value_feature", &with_value_feature}, {"diagonal_tol", &diagonal_tol}};
}

ReportBundle run_chain_transfer(ChainTransferConfig c) {
  if (c.k < 1 || c.k >= c.n_states) throw ConfigurationError("chain-transfer: K must lie in [1, |X|)");
  ReportBundle bundle;
  bundle.name = "chain-transfer";
  bundle.config = make_record(c.params());

  const Mdp mdp = build_chain_mdp(c.n_states, c.slip, 2.0, 1.0);
  const PolicyIterationTrace trace = policy_iteration(mdp, c.gamma, c.j_max, Policy::uniform(c.n_states, 2));
  const auto j_count = static_cast<Eigen::Index>(trace.policies.size());

  const Matrix sigma = Matrix::Identity(c.n_states, c.n_states);
  std::vector<Subspace> ebfs, rsbfs, rfs;
  for (Eigen::Index j = 0; j < j_count; ++j) {
    const Matrix p = induce(mdp, trace.policies[static_cast<std::size_t>(j)], c.gamma).transition();
    ebfs.push_back(ebf(p, c.k));
    rsbfs.push_back(rsbf(p, c.gamma, c.k, sigma));
    Rng rng = make_stream(c.seed, static_cast<std::uint64_t>(j));
    rfs.push_back(orthonormalize(normal_matrix(rng, c.n_states, c.k)));
  }

  Matrix policies(j_count, c.n_states);
  for (Eigen::Index j = 0; j < j_count; ++j)
    for (Eigen::Index x = 0; x < c.n_states; ++x)
      policies(j, x) = trace.policies[static_cast<std::size_t>(j)].probs()(x, kRight);
  std::vector<std::string> policy_header;
  for (int x = 0; x < c.n_states; ++x) policy_header.push_back("p_right_" + std::to_string(x));
  bundle.add_table("policies", matrix_to_csv(policies, policy_header));

  const auto header = value_header(j_count);
  struct Family {
    std::string name;
    const std::vector<Subspace>* features;
    Matrix plain;
    Matrix with_value;
  };
  std::vector<Family> families{{"ebf", &ebfs, {}, {}}, {"rsbf", &rsbfs, {}, {}}, {"rf", &rfs, {}, {}}};
  for (auto& f : families) {
    f.plain = angle_table(*f.features, trace.values);
    bundle.add_table(f.name + "_angles", matrix_to_csv(f.plain, header));
    SvgOptions opts;
    opts.title = f.name + ": angle(V_j', features of pi_j)";
    bundle.add_figure(f.name + "_angles", emit_svg(f.plain, PlotKind::kHeatmap, opts));
    if (c.with_value_feature) {
      std::vector<Subspace> augmented;
      for (Eigen::Index j = 0; j < j_count; ++j) {
        augmented.push_back(
            append_value((*f.features)[static_cast<std::size_t>(j)], trace.values[static_cast<std::size_t>(j)]));
      }
      f.with_value = angle_table(augmented, trace.values);
      bundle.add_table(f.name + "_value_angles", matrix_to_csv(f.with_value, header));
      opts.title = f.name + " + V_j: angle(V_j', features of pi_j)";
      bundle.add_figure(f.name + "_value_angles", emit_svg(f.with_value, PlotKind::kHeatmap, opts));
    }
  }
  const Matrix& rsbf_plain = families[1].plain;

  Eigen::Index monotone = 0;
  for (Eigen::Index r = 0; r < j_count; ++r) monotone += row_monotone(rsbf_plain, r) ? 1 : 0;
  const double monotone_fraction = static_cast<double>(monotone) / static_cast<double>(j_count);

  Matrix summary(1, 6);
  summary << static_cast<double>(j_count), trace.converged ? 1.0 : 0.0, mean_off_diagonal(families[0].plain),
      mean_off_diagonal(rsbf_plain), mean_off_diagonal(families[2].plain), monotone_fraction;
  bundle.add_table("summary", matrix_to_csv(summary, {"J", "converged", "ebf_mean_off_diagonal",
                                                      "rsbf_mean_off_diagonal", "rf_mean_off_diagonal",
                                                      "rsbf_monotone_row_fraction"}));
  bundle.add_check("rsbf_transfers_better_than_rf", mean_off_diagonal(rsbf_plain) - mean_off_diagonal(families[2].plain),
                   "<", 0.0, "summary");
  bundle.add_check("rsbf_angle_grows_with_distance", monotone_fraction, ">", 0.5, "summary");

  if (c.with_value_feature) {
    Matrix value_summary(3, 3);
    std::vector<std::string> rows{"ebf", "rsbf", "rf"};
    for (std::size_t f = 0; f < families.size(); ++f) {
      const Matrix& a = families[f].with_value;
      double next = 0.0;
      for (Eigen::Index j = 0; j + 1 < j_count; ++j) next += a(j, j + 1);
      value_summary.row(static_cast<Eigen::Index>(f)) << a.diagonal().maxCoeff(), mean_off_diagonal(a),
          j_count > 1 ? next / static_cast<double>(j_count - 1) : 0.0;
    }
    std::string csv = "# rows: ebf, rsbf, rf (each with V_j appended)\n";
    bundle.add_table("value_feature_summary",
                     csv + matrix_to_csv(value_summary, {"max_diagonal", "mean_off_diagonal", "mean_next_policy"}));
    for (std::size_t f = 0; f < families.size(); ++f) {
      bundle.add_check(rows[f] + "_value_diagonal_zero", value_summary(static_cast<Eigen::Index>(f), 0), "<",
                       c.diagonal_tol, "value_feature_summary");
    }
  }
  return bundle;
}

}  // namespace repdyn
