// Command-line front end: run / validate / constants over an experiment config.
//
// Exit codes: 0 success, 2 configuration error (unparsable or out-of-range
// config, bad invocation), 3 runtime failure (diverged runs, I/O trouble).

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dzgt/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void print_spec(const dzgt::ExperimentSpec& spec) {
  std::cout << "instance: "
            << (spec.kind == dzgt::InstanceKind::kBenchmark ? "benchmark" : "synthetic")
            << (spec.kind == dzgt::InstanceKind::kSynthetic
                    ? " (n=" + std::to_string(spec.synthetic_n) +
                          ", p=" + std::to_string(spec.synthetic_p) +
                          ", seed=" + std::to_string(spec.synthetic_seed) + ")"
                    : std::string{})
            << "\n";
  std::cout << "noise: xi ~ N(" << fmt6(spec.xi_mean) << ", " << fmt6(spec.xi_std)
            << "^2), zeta ~ N(" << fmt6(spec.zeta_mean) << ", " << fmt6(spec.zeta_std) << "^2)\n";
  std::cout << "topologies:";
  for (auto t : spec.topologies) std::cout << " " << dzgt::topology_name(t);
  std::cout << "\nagent counts:";
  for (int m : spec.agent_counts) std::cout << " " << m;
  std::cout << "\ngamma:";
  if (spec.gamma_from_theory) {
    std::cout << " theory";
  } else {
    for (double g : spec.gammas) std::cout << " " << fmt6(g);
  }
  std::cout << "\neta = " << fmt6(spec.eta) << ", K = " << spec.K
            << ", repeats = " << spec.repeats << ", master seed = " << spec.master_seed << "\n";
  std::cout << "warm start: " << (spec.warm_start ? "yes" : "no")
            << ", x0 scale = " << fmt6(spec.x0_scale) << "\n";
  std::cout << "evaluation: samples = " << spec.eval_samples
            << ", cadence = " << spec.eval_cadence
            << ", inner budget = " << spec.eval_inner_budget << "\n";
  std::cout << "output directory: " << spec.out_dir << "\n";
  const int combos = static_cast<int>(spec.topologies.size() * spec.agent_counts.size() *
                                      spec.gammas.size());
  std::cout << "grid: " << combos << " combinations x " << spec.repeats << " repeats = "
            << combos * spec.repeats << " runs\n";
}

int do_validate(const std::string& config_path) {
  const dzgt::ExperimentSpec spec = dzgt::parse_config_file(config_path);
  print_spec(spec);
  std::cout << "config OK\n";
  return kExitOk;
}

int do_constants(const std::string& config_path) {
  const dzgt::ExperimentSpec spec = dzgt::parse_config_file(config_path);
  const auto combos = dzgt::sweep_constants(spec);
  for (const auto& cc : combos) {
    std::cout << "== " << dzgt::topology_name(cc.topology) << ", m = " << cc.m << " ==\n";
    const auto& in = cc.inputs;
    std::cout << "  inputs: L0=" << fmt6(in.L0) << " L0_tilde=" << fmt6(in.L0_tilde)
              << " n=" << in.n << " m=" << in.m << " eta=" << fmt6(in.eta)
              << " rho=" << fmt6(in.rho) << " beta=" << fmt6(in.beta)
              << " alpha=" << fmt6(in.alpha) << " eps0=" << fmt6(in.eps0) << "\n";
    const auto& c = cc.constants;
    std::cout << "  thresholds: T1=" << fmt6(c.T1) << " T2=" << fmt6(c.T2)
              << " T3=" << fmt6(c.T3) << " C0=" << fmt6(c.C0)
              << " gamma_limit=" << fmt6(c.gamma_limit) << " gamma_max=" << fmt6(c.gamma_max)
              << "\n";
    std::cout << "  horizon: K_min=" << fmt6(c.K_min) << " gamma_eval=" << fmt6(c.gamma_eval)
              << "\n";
    std::cout << "  coefficients at gamma_eval: C1=" << fmt6(c.C1) << " C2=" << fmt6(c.C2)
              << " C3=" << fmt6(c.C3) << " C4=" << fmt6(c.C4) << " theta=" << fmt6(c.theta)
              << "\n";
  }
  return kExitOk;
}

int do_run(const std::string& config_path, const dzgt::RunOptions& options) {
  const dzgt::ExperimentSpec spec = dzgt::parse_config_file(config_path);
  const dzgt::ResultTable table = dzgt::run_experiment(spec, options);
  std::cout << "wrote " << table.out_dir << "/summary.csv and summary.md\n";
  bool any_failed = false;
  for (const auto& c : table.combos) any_failed = any_failed || c.any_failed;
  if (any_failed) {
    std::cerr << "some runs failed; see summary.md for details\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed zeroth-order gradient tracking for stochastic MPECs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_value = 0;
  int parallel = 1;

  CLI::App* cmd_run = app.add_subcommand("run", "Run the experiment grid from a config file");
  cmd_run->add_option("config", config_path, "Path to the experiment config")->required();
  cmd_run->add_option("--out", out_override,
                      "Output directory (overrides " + std::string(dzgt::kOutDirEnvVar) +
                          " and the config)");
  CLI::Option* seed_opt =
      cmd_run->add_option("--seed", seed_value, "Master seed override for the whole grid");
  cmd_run->add_option("--parallel", parallel, "Worker threads for the run grid")
      ->check(CLI::PositiveNumber);

  CLI::App* cmd_validate =
      app.add_subcommand("validate", "Parse and range-check a config, then print it");
  cmd_validate->add_option("config", config_path, "Path to the experiment config")->required();

  CLI::App* cmd_constants =
      app.add_subcommand("constants", "Print the convergence-constant report per grid cell");
  cmd_constants->add_option("config", config_path, "Path to the experiment config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (cmd_validate->parsed()) return do_validate(config_path);
    if (cmd_constants->parsed()) return do_constants(config_path);
    dzgt::RunOptions options;
    options.parallel = parallel;
    options.out_dir_override = out_override;
    if (seed_opt->count() > 0) options.seed_override = seed_value;
    options.log = &std::cout;
    return do_run(config_path, options);
  } catch (const dzgt::ConfigParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dzgt::ConfigRangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
