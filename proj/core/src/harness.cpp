#include "dzgt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dzgt {

namespace fs = std::filesystem;

const char* const kOutDirEnvVar = "DZGT_OUT_DIR";

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

struct KeyValue {
  std::string section, key, value;
  int line = 0;
};

double need_double(const KeyValue& kv) {
  const std::string v = trim(kv.value);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigParseError(kv.line, kv.key, "expected a real number, got '" + kv.value + "'");
  return d;
}

long need_long(const KeyValue& kv) {
  const std::string v = trim(kv.value);
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigParseError(kv.line, kv.key, "expected an integer, got '" + kv.value + "'");
  return out;
}

std::uint64_t need_u64(const KeyValue& kv) {
  const std::string v = trim(kv.value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigParseError(kv.line, kv.key,
                           "expected a nonnegative integer, got '" + kv.value + "'");
  return out;
}

bool need_bool(const KeyValue& kv) {
  const std::string v = lower(trim(kv.value));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigParseError(kv.line, kv.key, "expected a boolean, got '" + kv.value + "'");
}

Topology need_topology(const KeyValue& kv, const std::string& name) {
  const std::string v = lower(name);
  if (v == "ring") return Topology::kRing;
  if (v == "sparse") return Topology::kSparse;
  if (v == "complete") return Topology::kComplete;
  if (v == "file") return Topology::kCustom;
  throw ConfigParseError(kv.line, kv.key,
                         "unknown topology '" + name + "' (ring|sparse|complete|file)");
}

void apply_key(ExperimentSpec& spec, const KeyValue& kv) {
  const std::string id = kv.section + "." + kv.key;

  if (id == "instance.kind") {
    const std::string v = lower(trim(kv.value));
    if (v == "benchmark") spec.kind = InstanceKind::kBenchmark;
    else if (v == "synthetic") spec.kind = InstanceKind::kSynthetic;
    else throw ConfigParseError(kv.line, kv.key, "expected benchmark|synthetic");
  } else if (id == "instance.n") spec.synthetic_n = static_cast<int>(need_long(kv));
  else if (id == "instance.p") spec.synthetic_p = static_cast<int>(need_long(kv));
  else if (id == "instance.seed") spec.synthetic_seed = need_u64(kv);

  else if (id == "noise.xi_mean") spec.xi_mean = need_double(kv);
  else if (id == "noise.xi_std") spec.xi_std = need_double(kv);
  else if (id == "noise.zeta_mean") spec.zeta_mean = need_double(kv);
  else if (id == "noise.zeta_std") spec.zeta_std = need_double(kv);

  else if (id == "network.topologies") {
    spec.topologies.clear();
    for (const auto& name : split_list(kv.value))
      spec.topologies.push_back(need_topology(kv, name));
    if (spec.topologies.empty())
      throw ConfigParseError(kv.line, kv.key, "at least one topology required");
  } else if (id == "network.m") {
    spec.agent_counts.clear();
    for (const auto& item : split_list(kv.value)) {
      KeyValue one = kv;
      one.value = item;
      spec.agent_counts.push_back(static_cast<int>(need_long(one)));
    }
    if (spec.agent_counts.empty())
      throw ConfigParseError(kv.line, kv.key, "at least one agent count required");
  } else if (id == "network.sparse_seed") spec.sparse_seed = need_u64(kv);
  else if (id == "network.sparse_fixed_pattern") spec.sparse_fixed_pattern = need_bool(kv);
  else if (id == "network.edge_file") spec.edge_file = trim(kv.value);

  else if (id == "algorithm.gamma") {
    const std::string v = lower(trim(kv.value));
    if (v == "theory") {
      spec.gamma_from_theory = true;
      spec.gammas = {0.0};
    } else {
      spec.gamma_from_theory = false;
      spec.gammas.clear();
      for (const auto& item : split_list(kv.value)) {
        KeyValue one = kv;
        one.value = item;
        spec.gammas.push_back(need_double(one));
      }
      if (spec.gammas.empty())
        throw ConfigParseError(kv.line, kv.key, "at least one stepsize required");
    }
  } else if (id == "algorithm.eta") spec.eta = need_double(kv);
  else if (id == "algorithm.k") spec.K = need_long(kv);
  else if (id == "algorithm.repeats") spec.repeats = static_cast<int>(need_long(kv));
  else if (id == "algorithm.master_seed") spec.master_seed = need_u64(kv);
  else if (id == "algorithm.gamma_hat") {
    if (lower(trim(kv.value)) == "auto") spec.gamma_hat.reset();
    else spec.gamma_hat = need_double(kv);
  } else if (id == "algorithm.gamma_shift") spec.gamma_shift = need_double(kv);
  else if (id == "algorithm.warm_start") spec.warm_start = need_bool(kv);
  else if (id == "algorithm.x0_scale") spec.x0_scale = need_double(kv);
  else if (id == "algorithm.inner_budget") {
    if (lower(trim(kv.value)) == "auto") spec.inner_budget_fixed = 0;
    else spec.inner_budget_fixed = need_long(kv);
  } else if (id == "algorithm.residual_samples")
    spec.residual_samples = static_cast<int>(need_long(kv));
  else if (id == "algorithm.beta") {
    if (lower(trim(kv.value)) == "auto") spec.beta.reset();
    else spec.beta = need_double(kv);
  } else if (id == "algorithm.alpha") spec.alpha = need_double(kv);
  else if (id == "algorithm.eps0") {
    if (lower(trim(kv.value)) == "auto") spec.eps0.reset();
    else spec.eps0 = need_double(kv);
  } else if (id == "algorithm.lipschitz_box") spec.lipschitz_box = need_double(kv);
  else if (id == "algorithm.lipschitz_pairs") spec.lipschitz_pairs = static_cast<int>(need_long(kv));
  else if (id == "algorithm.lipschitz_draws") spec.lipschitz_draws = static_cast<int>(need_long(kv));
  else if (id == "algorithm.eval_samples") spec.eval_samples = static_cast<int>(need_long(kv));
  else if (id == "algorithm.eval_cadence") spec.eval_cadence = static_cast<int>(need_long(kv));
  else if (id == "algorithm.eval_inner_budget") spec.eval_inner_budget = need_long(kv);

  else if (id == "output.directory") spec.out_dir = trim(kv.value);

  else
    throw ConfigParseError(kv.line, kv.key, "unknown key in section [" + kv.section + "]");
}

}  // namespace

ExperimentSpec parse_config(const std::string& text) {
  static const std::vector<std::string> kSections = {"instance", "noise", "network", "algorithm",
                                                     "output"};
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  std::vector<std::string> seen;  // "section.key" duplicates check

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigParseError(line_no, "", "unterminated section header '" + line + "'");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
        throw ConfigParseError(line_no, "", "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError(line_no, "", "expected 'key = value', got '" + line + "'");
    if (section.empty())
      throw ConfigParseError(line_no, "", "key outside any [section]");

    KeyValue kv;
    kv.section = section;
    kv.key = lower(trim(line.substr(0, eq)));
    kv.value = trim(line.substr(eq + 1));
    kv.line = line_no;
    if (kv.key.empty()) throw ConfigParseError(line_no, "", "empty key");
    if (kv.value.empty()) throw ConfigParseError(line_no, kv.key, "empty value");

    const std::string id = kv.section + "." + kv.key;
    if (std::find(seen.begin(), seen.end(), id) != seen.end())
      throw ConfigParseError(line_no, kv.key, "duplicate key in section [" + section + "]");
    seen.push_back(id);

    apply_key(spec, kv);
  }

  validate_spec(spec);
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError(0, "", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_spec(const ExperimentSpec& spec) {
  auto range = [](bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigRangeError(field, msg);
  };

  range(spec.synthetic_n >= 1, "instance.n", "must be >= 1");
  range(spec.synthetic_p >= 1, "instance.p", "must be >= 1");
  range(spec.xi_std >= 0, "noise.xi_std", "must be >= 0");
  range(spec.zeta_std >= 0, "noise.zeta_std", "must be >= 0");
  range(!spec.topologies.empty(), "network.topologies", "must not be empty");
  range(!spec.agent_counts.empty(), "network.m", "must not be empty");
  for (int m : spec.agent_counts) range(m >= 1, "network.m", "agent counts must be >= 1");
  const bool has_file = std::find(spec.topologies.begin(), spec.topologies.end(),
                                  Topology::kCustom) != spec.topologies.end();
  if (has_file)
    range(!spec.edge_file.empty(), "network.edge_file", "required for the 'file' topology");

  if (!spec.gamma_from_theory)
    for (double g : spec.gammas)
      range(g > 0 && std::isfinite(g), "algorithm.gamma", "stepsizes must be positive and finite");
  range(spec.eta > 0, "algorithm.eta", "must be > 0");
  range(spec.K >= 0, "algorithm.k", "must be >= 0");
  range(spec.repeats >= 1, "algorithm.repeats", "must be >= 1");
  if (spec.gamma_hat) range(*spec.gamma_hat > 0, "algorithm.gamma_hat", "must be > 0");
  range(spec.gamma_shift >= 0, "algorithm.gamma_shift", "must be >= 0");
  range(spec.x0_scale >= 0, "algorithm.x0_scale", "must be >= 0");
  range(spec.inner_budget_fixed >= 0, "algorithm.inner_budget", "must be >= 1 (or auto)");
  range(spec.residual_samples >= 1, "algorithm.residual_samples", "must be >= 1");
  if (spec.beta) range(*spec.beta > 0 && *spec.beta < 2.0 / 3.0, "algorithm.beta",
                       "must lie in (0, 2/3)");
  range(spec.alpha > 0, "algorithm.alpha", "must be > 0");
  if (spec.eps0) range(*spec.eps0 >= 0, "algorithm.eps0", "must be >= 0");
  range(spec.lipschitz_box > 0, "algorithm.lipschitz_box", "must be > 0");
  range(spec.lipschitz_pairs >= 1, "algorithm.lipschitz_pairs", "must be >= 1");
  range(spec.lipschitz_draws >= 1, "algorithm.lipschitz_draws", "must be >= 1");
  range(spec.eval_samples >= 1, "algorithm.eval_samples", "must be >= 1");
  range(spec.eval_cadence >= 0, "algorithm.eval_cadence", "must be >= 0");
  range(spec.eval_inner_budget >= 1, "algorithm.eval_inner_budget", "must be >= 1");
  range(!spec.out_dir.empty(), "output.directory", "must not be empty");
}

SmpecInstance make_instance(const ExperimentSpec& spec, int m) {
  const NoiseModel xi = NoiseModel::normal(spec.xi_mean, spec.xi_std, 1);
  const NoiseModel zeta = NoiseModel::normal(spec.zeta_mean, spec.zeta_std, 2);
  if (spec.kind == InstanceKind::kBenchmark) {
    return builtin_benchmark(m, xi, zeta, spec.lipschitz_box, spec.lipschitz_pairs,
                             spec.lipschitz_draws);
  }
  return make_synthetic_quadratic(spec.synthetic_n, spec.synthetic_p, m, spec.synthetic_seed, xi,
                                  zeta)
      .instance(spec.lipschitz_box);
}

MixingMatrix make_mixing(const ExperimentSpec& spec, Topology t, int m) {
  TopologyParams params;
  params.sparse_seed = spec.sparse_seed;
  params.fixed_pattern_10 = spec.sparse_fixed_pattern;
  if (t == Topology::kCustom) params.custom_edges = read_edge_list_file(spec.edge_file);
  return build_mixing(t, m, params);
}

namespace {

InnerConfig make_inner(const ExperimentSpec& spec) {
  InnerConfig cfg;
  cfg.gamma_hat = spec.gamma_hat;
  cfg.Gamma = spec.gamma_shift;
  if (spec.inner_budget_fixed > 0) cfg.budget_rule = fixed_budget_rule(spec.inner_budget_fixed);
  cfg.residual_samples = spec.residual_samples;
  return cfg;
}

TheoryInputs combo_inputs(const ExperimentSpec& spec, const SmpecInstance& inst,
                          const MixingMatrix& mix) {
  TheoryInputs ti;
  ti.L0 = inst.L0;
  ti.L0_tilde = inst.L0_tilde;
  ti.n = inst.n;
  ti.m = inst.m;
  ti.eta = spec.eta;
  ti.rho = mix.rho;
  ti.beta = spec.beta ? *spec.beta : default_beta(mix.rho);
  ti.alpha = spec.alpha;
  if (spec.eps0) {
    ti.eps0 = *spec.eps0;
  } else {
    // Probe the inner solver once from a cold start at the origin and use its
    // own accuracy estimate as the initial-accuracy constant.
    Rng rng = make_stream(spec.master_seed, {0x45505330ULL});  // "EPS0"
    const InnerSolveResult probe = solve_inner(inst, Vector::Zero(inst.n), /*k=*/0,
                                               make_inner(spec), Vector::Zero(inst.p), rng);
    ti.eps0 = probe.epsilon_estimate;
  }
  return ti;
}

std::string topology_display(Topology t) {
  switch (t) {
    case Topology::kRing: return "Ring graph";
    case Topology::kSparse: return "Sparse graph";
    case Topology::kComplete: return "Complete graph";
    case Topology::kCustom: return "Custom graph";
  }
  return "?";
}

std::string cell_number(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", v);
  return buf;
}

std::string resolve_out_dir(const ExperimentSpec& spec, const RunOptions& options) {
  if (!options.out_dir_override.empty()) return options.out_dir_override;
  if (const char* env = std::getenv(kOutDirEnvVar); env != nullptr && *env != '\0') return env;
  return spec.out_dir;
}

}  // namespace

std::vector<ComboConstants> sweep_constants(const ExperimentSpec& spec) {
  validate_spec(spec);
  std::vector<ComboConstants> out;
  for (int m : spec.agent_counts) {
    const SmpecInstance inst = make_instance(spec, m);
    for (Topology t : spec.topologies) {
      const MixingMatrix mix = make_mixing(spec, t, m);
      ComboConstants cc;
      cc.topology = t;
      cc.m = m;
      cc.inputs = combo_inputs(spec, inst, mix);
      cc.constants = theory_constants(cc.inputs);
      out.push_back(std::move(cc));
    }
  }
  return out;
}

void write_trajectory_csv(const TrajectoryRecord& rec, std::ostream& out) {
  out << "epoch, objective_mean, objective_se, consensus_violation, tracker_dispersion, "
         "inner_steps\n";
  for (const EpochMetrics& em : rec.epochs) {
    out << em.epoch << ", " << format_g17(em.objective_mean) << ", "
        << format_g17(em.objective_se) << ", " << format_g17(em.consensus_violation) << ", "
        << format_g17(em.tracker_dispersion) << ", " << em.inner_steps << "\n";
  }
}

void write_summary_csv(const ResultTable& table, std::ostream& out) {
  out << "topology, m, gamma, repeat, run_seed, epoch0_objective, final_objective, "
         "final_objective_se, final_consensus, final_tracker_dispersion, total_inner_steps, "
         "status, note, csv_path\n";
  for (const CombinationResult& combo : table.combos) {
    for (const RunSummary& r : combo.runs) {
      std::string note = r.error;
      std::replace(note.begin(), note.end(), ',', ';');
      std::replace(note.begin(), note.end(), '\n', ' ');
      out << topology_name(r.topology) << ", " << r.m << ", " << format_g17(r.gamma) << ", "
          << r.repeat << ", " << r.run_seed << ", " << format_g17(r.epoch0_objective) << ", "
          << format_g17(r.final_objective) << ", " << format_g17(r.final_objective_se) << ", "
          << format_g17(r.final_consensus) << ", " << format_g17(r.final_tracker_dispersion)
          << ", " << r.total_inner_steps << ", " << (r.failed ? "failed" : "ok") << ", " << note
          << ", " << r.csv_path << "\n";
    }
  }
}

void write_summary_markdown(const ResultTable& table, const ExperimentSpec& spec,
                            std::ostream& out) {
  out << "# Sweep summary\n\n";
  out << "- instance: "
      << (spec.kind == InstanceKind::kBenchmark ? "benchmark (n=2, p=2)" : "synthetic quadratic")
      << "\n";
  out << "- noise: xi ~ N(" << format_g(spec.xi_mean) << ", " << format_g(spec.xi_std)
      << "^2), zeta ~ N(" << format_g(spec.zeta_mean) << ", " << format_g(spec.zeta_std)
      << "^2)\n";
  out << "- eta = " << format_g(spec.eta) << ", K = " << spec.K << ", repeats = " << spec.repeats
      << ", master seed = " << spec.master_seed << "\n\n";

  // Distinct gamma labels in combo order.
  std::vector<std::string> labels;
  for (const auto& c : table.combos)
    if (std::find(labels.begin(), labels.end(), c.gamma_label) == labels.end())
      labels.push_back(c.gamma_label);

  auto find_combo = [&](const std::string& label, Topology t, int m) -> const CombinationResult* {
    for (const auto& c : table.combos)
      if (c.gamma_label == label && c.topology == t && c.m == m) return &c;
    return nullptr;
  };

  for (const std::string& label : labels) {
    for (int which = 0; which < 2; ++which) {
      out << "## " << (which == 0 ? "Final consensus violation" : "Final objective estimate")
          << ", gamma = " << label;
      if (which == 1) out << " (epoch-0 estimate in parentheses)";
      out << "\n\n";

      out << "| Setting |";
      for (Topology t : spec.topologies) out << " " << topology_display(t) << " |";
      out << "\n|---|";
      for (size_t i = 0; i < spec.topologies.size(); ++i) out << "---|";
      out << "\n";
      for (int m : spec.agent_counts) {
        out << "| m = " << m << " |";
        for (Topology t : spec.topologies) {
          const CombinationResult* c = find_combo(label, t, m);
          if (c == nullptr) {
            out << " - |";
          } else if (which == 0) {
            out << " " << cell_number(c->mean_final_consensus) << " |";
          } else {
            out << " " << cell_number(c->mean_final_objective) << " ("
                << cell_number(c->mean_epoch0_objective) << ") |";
          }
        }
        out << "\n";
      }
      out << "\n";
    }
  }

  bool any_failed = false;
  for (const auto& c : table.combos) any_failed = any_failed || c.any_failed;
  if (any_failed) {
    out << "## Failed runs\n\n";
    for (const auto& c : table.combos)
      for (const auto& r : c.runs)
        if (r.failed)
          out << "- " << topology_name(r.topology) << " m=" << r.m << " gamma=" << c.gamma_label
              << " repeat=" << r.repeat << ": " << r.error << "\n";
    out << "\n";
  }
}

ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  validate_spec(spec);
  const std::uint64_t master = options.seed_override.value_or(spec.master_seed);

  ResultTable table;
  table.out_dir = resolve_out_dir(spec, options);
  fs::create_directories(fs::path(table.out_dir) / "runs");

  // Instances and mixing matrices are shared read-only across runs.
  std::map<int, SmpecInstance> instances;
  for (int m : spec.agent_counts)
    if (!instances.count(m)) instances.emplace(m, make_instance(spec, m));
  std::map<std::pair<int, int>, MixingMatrix> mixings;
  for (size_t ti = 0; ti < spec.topologies.size(); ++ti)
    for (int m : spec.agent_counts)
      mixings.emplace(std::make_pair(static_cast<int>(ti), m),
                      make_mixing(spec, spec.topologies[ti], m));

  struct Combo {
    Topology topology;
    int topo_index;
    int m;
    int gamma_index;
    double gamma_used;
    std::string label;
  };
  std::vector<Combo> combos;
  for (size_t ti = 0; ti < spec.topologies.size(); ++ti) {
    for (int m : spec.agent_counts) {
      const auto& mix = mixings.at({static_cast<int>(ti), m});
      for (size_t gi = 0; gi < spec.gammas.size(); ++gi) {
        Combo c;
        c.topology = spec.topologies[ti];
        c.topo_index = static_cast<int>(ti);
        c.m = m;
        c.gamma_index = static_cast<int>(gi);
        if (spec.gamma_from_theory) {
          const TheoryConstants tc = theory_constants(combo_inputs(spec, instances.at(m), mix));
          c.gamma_used = tc.C0 / std::sqrt(std::max(static_cast<double>(spec.K), 1.0));
          c.label = "theory";
        } else {
          c.gamma_used = spec.gammas[gi];
          c.label = format_g(spec.gammas[gi]);
        }
        combos.push_back(std::move(c));
      }
    }
  }

  struct Task {
    size_t combo = 0;
    int repeat = 0;
  };
  std::vector<Task> tasks;
  for (size_t ci = 0; ci < combos.size(); ++ci)
    for (int r = 0; r < spec.repeats; ++r) tasks.push_back({ci, r});

  std::vector<RunSummary> summaries(tasks.size());
  std::vector<TrajectoryRecord> records(tasks.size());

  auto run_task = [&](size_t t) {
    const Combo& c = combos[tasks[t].combo];
    const int repeat = tasks[t].repeat;

    RunSummary rs;
    rs.topology = c.topology;
    rs.m = c.m;
    rs.gamma = c.gamma_used;
    rs.repeat = repeat;
    // The seed path deliberately excludes the topology so the three graphs of
    // one (m, gamma, repeat) row share common random numbers and topology
    // comparisons are paired.
    rs.run_seed = derive_seed(master, {0x52554eULL, static_cast<std::uint64_t>(c.m),
                                       static_cast<std::uint64_t>(c.gamma_index),
                                       static_cast<std::uint64_t>(repeat)});

    RunConfig rc;
    rc.gamma = c.gamma_used;
    rc.eta = spec.eta;
    rc.K = spec.K;
    rc.inner = make_inner(spec);
    rc.seed = rs.run_seed;
    rc.x0_scale = spec.x0_scale;
    rc.warm_start = spec.warm_start;
    rc.eval.samples = spec.eval_samples;
    rc.eval.cadence = spec.eval_cadence;
    rc.eval.inner_budget = spec.eval_inner_budget;

    try {
      TrajectoryRecord rec =
          run(instances.at(c.m), mixings.at({c.topo_index, c.m}), rc);
      const EpochMetrics& first = rec.epochs.front();
      const EpochMetrics& last = rec.epochs.back();
      rs.epoch0_objective = first.objective_mean;
      rs.final_objective = last.objective_mean;
      rs.final_objective_se = last.objective_se;
      rs.final_consensus = last.consensus_violation;
      rs.final_tracker_dispersion = last.tracker_dispersion;
      rs.total_inner_steps = rec.total_inner_steps;
      records[t] = std::move(rec);
    } catch (const std::exception& e) {
      rs.failed = true;
      rs.error = e.what();
      rs.epoch0_objective = rs.final_objective = rs.final_objective_se = kNaN;
      rs.final_consensus = rs.final_tracker_dispersion = kNaN;
    }
    summaries[t] = std::move(rs);
  };

  const int workers = std::max(1, options.parallel);
  if (workers == 1) {
    for (size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) run_task(t);
      });
    for (auto& th : pool) th.join();
  }

  // Write per-run CSVs and assemble per-combination aggregates.
  table.combos.reserve(combos.size());
  for (size_t ci = 0; ci < combos.size(); ++ci) {
    const Combo& c = combos[ci];
    CombinationResult cr;
    cr.topology = c.topology;
    cr.m = c.m;
    cr.gamma_used = c.gamma_used;
    cr.gamma_label = c.label;

    double sum_cv = 0, sum_obj = 0, sum_obj0 = 0;
    int ok_count = 0;
    for (size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].combo != ci) continue;
      RunSummary rs = summaries[t];
      if (!rs.failed) {
        const std::string dir = std::string("runs/") + topology_name(c.topology) + "-m" +
                                std::to_string(c.m) + "-gamma" + c.label;
        fs::create_directories(fs::path(table.out_dir) / dir);
        rs.csv_path = dir + "/run" + std::to_string(rs.repeat) + ".csv";
        std::ofstream csv(fs::path(table.out_dir) / rs.csv_path);
        if (!csv) throw Error("run_experiment: cannot write '" + rs.csv_path + "'");
        write_trajectory_csv(records[t], csv);

        sum_cv += rs.final_consensus;
        sum_obj += rs.final_objective;
        sum_obj0 += rs.epoch0_objective;
        ++ok_count;
      } else {
        cr.any_failed = true;
      }
      cr.runs.push_back(std::move(rs));
    }
    cr.mean_final_consensus = ok_count > 0 ? sum_cv / ok_count : kNaN;
    cr.mean_final_objective = ok_count > 0 ? sum_obj / ok_count : kNaN;
    cr.mean_epoch0_objective = ok_count > 0 ? sum_obj0 / ok_count : kNaN;
    table.combos.push_back(std::move(cr));

    if (options.log != nullptr) {
      const CombinationResult& done = table.combos.back();
      (*options.log) << topology_name(done.topology) << " m=" << done.m
                     << " gamma=" << done.gamma_label
                     << " final consensus=" << cell_number(done.mean_final_consensus)
                     << " objective=" << cell_number(done.mean_final_objective)
                     << (done.any_failed ? "  [FAILURES]" : "") << "\n";
    }
  }

  {
    std::ofstream csv(fs::path(table.out_dir) / "summary.csv");
    if (!csv) throw Error("run_experiment: cannot write summary.csv");
    write_summary_csv(table, csv);
    std::ofstream md(fs::path(table.out_dir) / "summary.md");
    if (!md) throw Error("run_experiment: cannot write summary.md");
    write_summary_markdown(table, spec, md);
  }
  return table;
}

}  // namespace dzgt
