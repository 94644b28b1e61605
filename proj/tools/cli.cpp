#include "cli.hpp"

#include "repdyn/csv.hpp"
#include "repdyn/dynamics.hpp"
#include "repdyn/errors.hpp"
#include "repdyn/experiments.hpp"
#include "repdyn/gridworld.hpp"
#include "repdyn/svg.hpp"
#include "repdyn/trajectory_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>

namespace repdyn::cli {
namespace {

struct Common {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;
  std::vector<std::string> sets;
};

struct FlowArgs {
  std::string flow = "td";
  std::string mdp = "chain";
  double gamma = 0.9;
  double t_max = 100.0;
  int intervals = 100;
  int n = 3;
  double lambda = 0.5;
  double alpha = 1.0;
  double beta = 0.0;
  double heads = 10;
  double k = 4;
  double step = kDefaultStep;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master seed (falls back to REPDYN_SEED, then 0)")
      ->each([&c](const std::string&) { c.seed_given = true; });
  sub->add_option("--out", c.out_dir, "Output directory for the report bundle");
  sub->add_option("--set", c.sets, "Config override key=value (repeatable)");
}

Overrides parse_sets(const std::vector<std::string>& sets) {
  Overrides out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigurationError("--set expects key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq);
    if (out.count(key)) throw ConfigurationError("--set: key '" + key + "' given twice");
    out[key] = s.substr(eq + 1);
  }
  return out;
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed_given) return c.seed;
  if (const char* env = std::getenv("REPDYN_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigurationError("REPDYN_SEED must be a nonnegative integer");
    return v;
  }
  return 0;
}

int report(const ReportBundle& bundle, const std::filesystem::path& dir, std::ostream& out) {
  write_bundle(bundle, dir);
  for (const auto& c : bundle.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << format_double(c.measured) << ' ' << c.comparator << ' '
        << format_double(c.threshold) << '\n';
  }
  out << bundle.name << ": wrote " << dir.string() << '\n';
  return bundle.all_passed() ? kOk : kCheckFailed;
}

template <class Config, class Runner>
int experiment(Config config, Runner runner, const Common& c, const std::string& command, std::ostream& out) {
  config.seed = resolve_seed(c);
  apply_overrides(config.params(), parse_sets(c.sets));
  const std::filesystem::path dir = c.out_dir.empty() ? std::filesystem::path("out") / command : std::filesystem::path(c.out_dir);
  return report(runner(config), dir, out);
}

int checked_int(double v, const char* name) {
  if (v != std::floor(v) || v < 1 || v > 1e9) throw ConfigurationError(std::string(name) + " must be a positive integer");
  return static_cast<int>(v);
}

MarkovChain flow_chain(const FlowArgs& a) {
  if (a.mdp == "chain") {
    const Mdp mdp = build_reference_chain();
    return induce(mdp, Policy::uniform(mdp.n_states(), mdp.n_actions()), a.gamma);
  }
  if (a.mdp == "four-rooms") {
    const auto [mdp, policy] = build_four_rooms();
    return induce(mdp, policy, a.gamma);
  }
  const auto [mdp, policy] = build_two_state_mdp(0.9, 0.1, Eigen::Vector2d(1.0, 0.0));
  return induce(mdp, policy, a.gamma);
}

ReportBundle run_flow(const FlowArgs& a, std::uint64_t seed) {
  const MarkovChain chain = flow_chain(a);
  const Eigen::Index n = chain.n_states();
  const std::vector<double> times = time_grid(a.t_max, a.intervals);
  const int heads = checked_int(a.heads, "--M");
  const int k = checked_int(a.k, "--K");

  ReportBundle bundle;
  bundle.name = "flow";
  bundle.config = {{"flow", a.flow},       {"mdp", a.mdp},   {"gamma", a.gamma},
                   {"t_max", a.t_max},     {"intervals", static_cast<std::int64_t>(a.intervals)},
                   {"n", static_cast<std::int64_t>(a.n)}, {"lambda", a.lambda},
                   {"alpha", a.alpha},     {"beta", a.beta}, {"M", static_cast<std::int64_t>(heads)},
                   {"K", static_cast<std::int64_t>(k)}, {"step", a.step},
                   {"seed", static_cast<std::int64_t>(seed)}};

  const bool value_flow = a.flow == "td" || a.flow == "mc" || a.flow == "nstep" || a.flow == "tdlambda";
  Trajectory traj;
  if (value_flow) {
    const Vector v0 = sample_features(n, 1, seed).col(0) * std::sqrt(static_cast<double>(n));
    if (a.flow == "td") traj = td_value_flow(chain, v0, times);
    else if (a.flow == "mc") traj = mc_value_flow(chain, v0, times);
    else if (a.flow == "nstep") traj = nstep_value_flow(chain, a.n, v0, times);
    else traj = td_lambda_value_flow(chain, a.lambda, v0, times);
  } else {
    const Matrix phi0 = sample_features(n, k, seed);
    const Matrix identity = Matrix::Identity(n, n);
    if (a.flow == "joint") {
      traj = joint_flow(chain, phi0, sample_weights(1, k, 1.0, seed).col(0), a.alpha, a.beta, times, a.step);
    } else if (a.flow == "ensemble" || a.flow == "rc") {
      EnsembleState s{phi0, sample_weights(heads, k, 1.0 / heads, seed), std::nullopt};
      if (a.flow == "rc") s.cumulants = sample_cumulants(heads, identity, seed);
      traj = ensemble_flow(chain, s, a.alpha, a.beta, times, a.step, false);
    } else if (a.flow == "limit") {
      // Infinite-ensemble limit with reward forcing R eps^T, eps ~ N(0, I).
      const Vector eps = sample_weights(heads, k, 1.0 / heads, seed).rowwise().sum();
      traj = linear_limit_flow({chain.gamma() * chain.transition() - identity, chain.reward() * eps.transpose(), phi0},
                               times);
    } else {
      throw ConfigurationError("--flow must be one of td, mc, nstep, tdlambda, joint, ensemble, rc, limit");
    }
  }
  traj.add_meta("seed", std::to_string(seed));
  traj.add_meta("mdp", a.mdp);
  bundle.add_table("trajectory", value_flow ? trajectory_to_wide_csv(traj) : trajectory_to_long_csv(traj));

  Matrix curve(static_cast<Eigen::Index>(times.size()), value_flow ? n + 1 : 2);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    curve(r, 0) = times[i];
    if (value_flow) curve.row(r).tail(n) = traj.states[i].col(0).transpose();
    else curve(r, 1) = traj.states[i].norm();
  }
  SvgOptions opts;
  opts.title = value_flow ? a.flow + " value flow: V_t(x)" : a.flow + " flow: |Phi_t|_F";
  if (!value_flow) opts.series_labels = {"|Phi_t|_F"};
  bundle.add_figure("trajectory", emit_svg(curve, PlotKind::kLine, opts));
  return bundle;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"repdyn: tabular representation-dynamics laboratory"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Common common;
  FlowArgs flow;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"two-state", "TD vs MC value dynamics on a two-state chain"},
      {"four-rooms", "Ensemble feature evolution on the four-rooms gridworld"},
      {"chain-transfer", "EBF/RSBF/random-feature transfer along policy iteration"},
      {"limit-checks", "Finite-M ensemble and random-cumulant limit checks"},
      {"bayes-opt", "RSBF trace maximisation versus random subspaces"},
      {"multi-task", "Multi-policy / multi-discount ensemble limits"},
      {"flow", "Integrate a single flow and write its trajectory"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, common);
    subs[name] = sub;
  }
  CLI::App* f = subs["flow"];
  f->add_option("--flow", flow.flow, "td|mc|nstep|tdlambda|joint|ensemble|rc|limit")
      ->check(CLI::IsMember({"td", "mc", "nstep", "tdlambda", "joint", "ensemble", "rc", "limit"}));
  f->add_option("--mdp", flow.mdp, "chain|four-rooms|two-state")
      ->check(CLI::IsMember({"chain", "four-rooms", "two-state"}));
  f->add_option("--gamma", flow.gamma, "Discount");
  f->add_option("--t-max", flow.t_max, "Final time");
  f->add_option("--intervals", flow.intervals, "Number of output intervals on [0, t-max]");
  f->add_option("--n", flow.n, "n for the n-step flow");
  f->add_option("--lambda", flow.lambda, "lambda for TD(lambda)");
  f->add_option("--alpha", flow.alpha, "Feature learning rate");
  f->add_option("--beta", flow.beta, "Weight learning rate (0 freezes weights)");
  f->add_option("--M", flow.heads, "Number of heads");
  f->add_option("--K", flow.k, "Number of features");
  f->add_option("--step", flow.step, "RK4 step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  try {
    if (command == "two-state") return experiment(TwoStateConfig{}, run_two_state, common, command, out);
    if (command == "four-rooms") return experiment(FourRoomsConfig{}, run_four_rooms_features, common, command, out);
    if (command == "chain-transfer") return experiment(ChainTransferConfig{}, run_chain_transfer, common, command, out);
    if (command == "limit-checks") return experiment(LimitChecksConfig{}, run_limit_checks, common, command, out);
    if (command == "bayes-opt") return experiment(BayesOptimalityConfig{}, run_bayes_optimality, common, command, out);
    if (command == "multi-task") return experiment(MultiTaskConfig{}, run_multi_task, common, command, out);
    if (!common.sets.empty()) throw ConfigurationError("flow takes no --set overrides; use its flags");
    const std::filesystem::path dir = common.out_dir.empty() ? std::filesystem::path("out") / "flow" : std::filesystem::path(common.out_dir);
    return report(run_flow(flow, resolve_seed(common)), dir, out);
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace repdyn::cli
