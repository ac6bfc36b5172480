#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dzgt/driver.hpp"
#include "dzgt/theory.hpp"

namespace dzgt {

enum class InstanceKind { kBenchmark, kSynthetic };

/// A full sweep description: instance family, noise, network grid, algorithm
/// parameters, and output location. parse_config() fills this from the INI
/// config format documented in the README; an empty config is the default
/// single-combination benchmark run (complete graph, m = 5, gamma = 1e-5,
/// eta = 0.1, K = 100, 5 repeats).
struct ExperimentSpec {
  // [instance]
  InstanceKind kind = InstanceKind::kBenchmark;
  int synthetic_n = 3;
  int synthetic_p = 3;
  std::uint64_t synthetic_seed = 7;

  // [noise]
  double xi_mean = 1.0, xi_std = 0.1;
  double zeta_mean = 1.0, zeta_std = 0.1;

  // [network]
  std::vector<Topology> topologies{Topology::kComplete};
  std::vector<int> agent_counts{5};
  std::uint64_t sparse_seed = 1;
  bool sparse_fixed_pattern = false;
  std::string edge_file;  // required when topologies contains "file"

  // [algorithm]
  std::vector<double> gammas{1e-5};
  bool gamma_from_theory = false;  // gamma = theory: per-combination C0/sqrt(K)
  double eta = 0.1;
  long K = 100;
  int repeats = 5;
  std::uint64_t master_seed = 20240817;
  std::optional<double> gamma_hat;  // unset = 1/mu_F
  double gamma_shift = 1.0;         // Gamma in the inner stepsize schedule
  bool warm_start = true;
  double x0_scale = 1.0;
  long inner_budget_fixed = 0;  // 0 = epoch-driven ceil(sqrt(k+1))
  int residual_samples = 8;
  std::optional<double> beta;  // unset = min(1/3, (rho^-2 - 1)/2)
  double alpha = 1.0;
  std::optional<double> eps0;  // unset = probe-solve estimate
  double lipschitz_box = 2.0;
  int lipschitz_pairs = 64;
  int lipschitz_draws = 32;
  int eval_samples = 200;
  int eval_cadence = 1;
  long eval_inner_budget = 2000;

  // [output]
  std::string out_dir = "dzgt-out";
};

/// Parses the INI-style config text. Unknown sections/keys, malformed values,
/// and duplicate keys raise ConfigParseError with a 1-based line number;
/// values outside documented ranges raise ConfigRangeError.
ExperimentSpec parse_config(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);
void validate_spec(const ExperimentSpec& spec);

/// Instance for one agent count under this spec's noise settings.
SmpecInstance make_instance(const ExperimentSpec& spec, int m);

/// Mixing matrix for one (topology, m) cell of the sweep grid.
MixingMatrix make_mixing(const ExperimentSpec& spec, Topology t, int m);

struct RunSummary {
  Topology topology = Topology::kComplete;
  int m = 0;
  double gamma = 0.0;
  int repeat = 0;
  std::uint64_t run_seed = 0;
  bool failed = false;
  std::string error;
  double final_consensus = 0.0;
  double final_tracker_dispersion = 0.0;
  double epoch0_objective = 0.0;
  double final_objective = 0.0;
  double final_objective_se = 0.0;
  long total_inner_steps = 0;
  std::string csv_path;  // relative to the output directory
};

struct CombinationResult {
  Topology topology = Topology::kComplete;
  int m = 0;
  double gamma_used = 0.0;  // resolved value (theory mode computes it)
  std::string gamma_label;  // config-facing label ("1e-05" or "theory")
  bool any_failed = false;
  std::vector<RunSummary> runs;
  double mean_final_consensus = 0.0;
  double mean_final_objective = 0.0;
  double mean_epoch0_objective = 0.0;
};

struct ResultTable {
  std::vector<CombinationResult> combos;
  std::string out_dir;  // resolved output directory
};

struct RunOptions {
  int parallel = 1;
  std::string out_dir_override;             // --out beats DZGT_OUT_DIR beats config
  std::optional<std::uint64_t> seed_override;  // replaces the master seed
  std::ostream* log = nullptr;              // optional progress stream
};

/// Name of the environment variable that overrides [output] directory.
extern const char* const kOutDirEnvVar;

/// Runs the whole grid (topologies x agent counts x gammas x repeats),
/// writing one trajectory CSV per run plus summary.csv and summary.md under
/// the output directory. Individual run failures are recorded in the table
/// (any_failed) without aborting the rest of the grid; configuration-level
/// problems (unreadable edge file, disconnected graph, bad sizes) throw.
ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Theory-constant report for every (topology, m) cell of the grid.
struct ComboConstants {
  Topology topology;
  int m = 0;
  TheoryInputs inputs;
  TheoryConstants constants;
};
std::vector<ComboConstants> sweep_constants(const ExperimentSpec& spec);

/// Trajectory CSV: header
///   epoch, objective_mean, objective_se, consensus_violation, tracker_dispersion, inner_steps
/// then one row per epoch (0..K), doubles rendered with %.17g.
void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& out);

void write_summary_csv(const ResultTable& table, std::ostream& out);
void write_summary_markdown(const ResultTable& table, const ExperimentSpec& spec,
                            std::ostream& out);

/// Shortest representation that round-trips a double (%.17g).
std::string format_g17(double v);

}  // namespace dzgt
