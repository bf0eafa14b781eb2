// Command-line surface for sequential quantum hypothesis testing: divergence
// reports, batched test simulation, exponent sweeps, and error-exponent
// region/figure data.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqht/montecarlo.hpp"
#include "sqht/regions.hpp"
#include "sqht/version.hpp"

namespace {

using nlohmann::ordered_json;
using namespace sqht;

constexpr double kNatsPerBit = 0.6931471805599453;

struct CommonInput {
  std::string states_path;
  bool use_family = false;
  double r0 = 0.0, r1 = 0.0, theta = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int restarts = 20;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
  out << content;
}

void add_state_options(CLI::App* cmd, CommonInput& in) {
  auto* states = cmd->add_option("--states", in.states_path, "state-pair JSON file");
  auto* family = cmd->add_option_function<std::string>(
      "--family",
      [&in](const std::string& value) {
        if (value != "qubit") throw CLI::ValidationError("--family", "only 'qubit' is supported");
        in.use_family = true;
      },
      "parametric family instead of a state file");
  cmd->add_option("--r0", in.r0, "family parameter r0");
  cmd->add_option("--r1", in.r1, "family parameter r1");
  cmd->add_option("--theta", in.theta, "family parameter theta");
  states->excludes(family);
}

void add_common_options(CLI::App* cmd, CommonInput& in) {
  cmd->add_option("--seed", in.seed, "master seed; all randomness derives from it")
      ->default_val(0);
  cmd->add_option("--threads", in.threads,
                  "worker cap (execution only, never affects results)");
  cmd->add_option("--restarts", in.restarts, "optimizer random restarts")->default_val(20);
}

unsigned resolve_thread_cap(const CLI::App* cmd, unsigned flag_value) {
  if (cmd->count("--threads") > 0) return flag_value;
  if (const char* env = std::getenv("SQHT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 0;
}

StatePair load_pair(const CommonInput& in) {
  if (in.use_family) return qubit_family(in.r0, in.r1, in.theta);
  if (in.states_path.empty())
    throw Error(ErrorKind::Config, "provide --states or --family");
  return parse_state_pair(read_file(in.states_path));
}

ordered_json input_echo(const CommonInput& in) {
  ordered_json echo;
  if (in.use_family) {
    echo["family"] = {{"type", "qubit"}, {"r0", in.r0}, {"r1", in.r1}, {"theta", in.theta}};
  } else {
    echo["states"] = in.states_path;
  }
  echo["seed"] = in.seed;
  echo["restarts"] = in.restarts;
  return echo;
}

ordered_json estimate_json(const Estimate& e) {
  return ordered_json{{"value", e.value}, {"se", e.se}};
}

bool is_file_path(const std::string& path) { return !path.empty() && path != "-"; }

// CSV schemas are fixed, so commands that write CSV files record their
// resolved configuration in a JSON run record on stdout.
void emit_run_record(const std::string& command, ordered_json config,
                     const std::vector<std::pair<std::string, std::string>>& outputs) {
  ordered_json doc;
  doc["artifact_version"] = kArtifactVersion;
  doc["command"] = command;
  doc["config"] = std::move(config);
  ordered_json outs;
  for (const auto& [key, value] : outputs) outs[key] = value;
  doc["outputs"] = std::move(outs);
  std::cout << doc.dump(2) << "\n";
}

ordered_json meta_json(const OptimizerMeta& meta) {
  return ordered_json{{"restarts_used", meta.restarts_used},
                      {"converged", meta.converged},
                      {"final_gradient_norm", meta.final_gradient_norm},
                      {"best_restart", meta.best_restart}};
}

OptimizerOptions optimizer_options(const CommonInput& in, std::uint64_t salt) {
  OptimizerOptions opts;
  opts.restarts = in.restarts;
  opts.seed = derive_seed(in.seed, salt);
  opts.threads = in.threads;
  return opts;
}

// --- divergence ---------------------------------------------------------

int cmd_divergence(const CommonInput& in, int block_l, bool bits,
                   const std::string& out_path) {
  const StatePair pair = load_pair(in);
  const OptimizerOptions opts = optimizer_options(in, 0xD1);

  const MeasuredResult m01 = measured_relative_entropy(pair, opts);
  const MeasuredResult m10 = measured_relative_entropy(pair.swapped(), opts);

  ordered_json results;
  results["d_quantum_01"] = quantum_relative_entropy(pair);
  results["d_quantum_10"] = quantum_relative_entropy(pair.swapped());
  results["d_measured_01"] = m01.value;
  results["d_measured_10"] = m10.value;
  results["d_max_01"] = max_relative_entropy(pair.rho0, pair.rho1);
  results["d_max_10"] = max_relative_entropy(pair.rho1, pair.rho0);
  results["increment_bound"] = increment_bound(pair);
  results["optimal_pvm_01"] = ordered_json::parse(povm_to_json(m01.pvm));
  results["optimal_pvm_10"] = ordered_json::parse(povm_to_json(m10.pvm));
  results["optimizer_meta_01"] = meta_json(m01.meta);
  results["optimizer_meta_10"] = meta_json(m10.meta);
  if (block_l > 1) {
    const BlockRates rates = block_rates(pair, block_l, opts);
    results["block"] = ordered_json{{"l", rates.l},
                                    {"rate_01", rates.rate_01},
                                    {"rate_10", rates.rate_10},
                                    {"ceiling_01", rates.ceiling_01},
                                    {"ceiling_10", rates.ceiling_10}};
  }
  if (bits) {
    ordered_json in_bits;
    for (const char* key : {"d_quantum_01", "d_quantum_10", "d_measured_01",
                            "d_measured_10", "d_max_01", "d_max_10", "increment_bound"})
      in_bits[key] = results[key].get<double>() / kNatsPerBit;
    results["bits"] = std::move(in_bits);
  }

  ordered_json doc;
  doc["artifact_version"] = kArtifactVersion;
  doc["command"] = "divergence";
  ordered_json config = input_echo(in);
  config["block"] = block_l;
  config["bits"] = bits;
  doc["config"] = std::move(config);
  doc["results"] = std::move(results);
  write_output(out_path, doc.dump(2));
  return 0;
}

// --- strategy spec ------------------------------------------------------

Povm povm_from_source(const std::string& source, const StatePair& pair,
                      const OptimizerOptions& opts) {
  if (source == "optimal01") return measured_relative_entropy(pair, opts).pvm;
  if (source == "optimal10") return measured_relative_entropy(pair.swapped(), opts).pvm;
  return parse_povm(read_file(source));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) parts.push_back(item);
  return parts;
}

Strategy build_strategy(const std::string& spec, const StatePair& pair,
                        const OptimizerOptions& opts) {
  if (spec == "adaptive") return build_adaptive_strategy(pair, opts);
  if (spec.rfind("fixed:", 0) == 0)
    return Strategy::fixed(povm_from_source(spec.substr(6), pair, opts));
  if (spec.rfind("cyclic:", 0) == 0) {
    const std::vector<std::string> parts = split(spec, ':');
    if (parts.size() != 3)
      throw Error(ErrorKind::Config, "cyclic spec is cyclic:<sources>:<counts>");
    const std::vector<std::string> sources = split(parts[1], ',');
    const std::vector<std::string> count_items = split(parts[2], ',');
    if (sources.empty() || sources.size() != count_items.size())
      throw Error(ErrorKind::Config, "cyclic needs one count per POVM source");
    std::vector<Povm> povms;
    std::vector<int> counts;
    for (std::size_t j = 0; j < sources.size(); ++j) {
      povms.push_back(povm_from_source(sources[j], pair, opts)
                          .with_prefixed_labels("b" + std::to_string(j) + "/"));
      counts.push_back(std::stoi(count_items[j]));
    }
    return Strategy::cyclic(std::move(povms), std::move(counts));
  }
  throw Error(ErrorKind::Config, "unknown strategy spec: " + spec);
}

// --- simulate -----------------------------------------------------------

ordered_json batch_json(const BatchEstimate& est) {
  ordered_json e;
  e["alpha_hat"] = estimate_json(est.alpha_hat);
  e["alpha_wilson"] = ordered_json{{"lo", est.alpha_wilson.lo}, {"hi", est.alpha_wilson.hi}};
  e["beta_hat"] = estimate_json(est.beta_hat);
  e["beta_wilson"] = ordered_json{{"lo", est.beta_wilson.lo}, {"hi", est.beta_wilson.hi}};
  e["alpha_hat_is"] = est.alpha_hat_is ? estimate_json(*est.alpha_hat_is) : ordered_json();
  e["beta_hat_is"] = est.beta_hat_is ? estimate_json(*est.beta_hat_is) : ordered_json();
  e["mean_t0"] = est.mean_t0;
  e["mean_t1"] = est.mean_t1;
  e["exceedance_0"] = est.exceedance_0;
  e["exceedance_1"] = est.exceedance_1;
  e["truncated_count"] = est.truncated_count;
  e["estimates_usable"] = est.estimates_usable;
  e["violations"] = ordered_json{{"increment_bound", est.violations.increment_bound},
                                 {"policy", est.violations.policy},
                                 {"stopping", est.violations.stopping},
                                 {"overshoot", est.violations.overshoot}};
  auto counts = [](const HypothesisStats& h) {
    return ordered_json{{"trials", h.trials},
                        {"decide0", h.decide0},
                        {"decide1", h.decide1},
                        {"truncated", h.truncated}};
  };
  e["counts"] = ordered_json{{"h0", counts(est.h0)}, {"h1", counts(est.h1)}};
  return e;
}

int cmd_simulate(const CommonInput& in, long n, double tau, double tau_frac,
                 std::uint64_t trials, const std::string& strategy_spec,
                 const std::string& trajectories_path, const std::string& out_path) {
  const StatePair pair = load_pair(in);
  const OptimizerOptions opts = optimizer_options(in, 0x51);
  const Strategy strategy = build_strategy(strategy_spec, pair, opts);
  const DriftRates drifts = strategy_drifts(strategy, pair);
  if (tau_frac > 0.0) tau = tau_frac * std::min(drifts.under_h0, drifts.under_h1);

  SqprtParams params = [&] {
    try {
      return thresholds_for(n, tau, drifts.under_h1, drifts.under_h0);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::TauTooLarge) {
        std::ostringstream os;
        os << e.detail() << "; drift_under_h0 = " << drifts.under_h0
           << ", drift_under_h1 = " << drifts.under_h1;
        throw Error(ErrorKind::TauTooLarge, os.str());
      }
      throw;
    }
  }();

  BatchConfig config;
  config.trials = trials;
  config.seed = in.seed;
  config.n = n;
  config.tau = tau;
  config.record_trajectories = !trajectories_path.empty();
  config.hypothesis = Hypothesis::Both;
  config.threads = in.threads;

  const BatchEstimate estimate = run_batch(pair, strategy, params, config);
  if (!trajectories_path.empty())
    write_output(trajectories_path, trajectories_csv(estimate.recorded, strategy));

  ordered_json doc;
  doc["artifact_version"] = kArtifactVersion;
  doc["command"] = "simulate";
  ordered_json config_echo = input_echo(in);
  config_echo["n"] = n;
  config_echo["tau"] = tau;
  config_echo["trials"] = trials;
  config_echo["strategy"] = strategy_spec;
  config_echo["trajectories"] = trajectories_path;
  doc["config"] = std::move(config_echo);
  doc["thresholds"] = ordered_json{{"a_n", params.a},
                                   {"b_n", params.b},
                                   {"t_max", params.t_max},
                                   {"drift_under_h0", drifts.under_h0},
                                   {"drift_under_h1", drifts.under_h1}};
  doc["estimates"] = batch_json(estimate);
  write_output(out_path, doc.dump(2));
  return 0;
}

// --- sweep --------------------------------------------------------------

int cmd_sweep(const CommonInput& in, const std::string& n_list, double tau,
              double tau_frac, std::uint64_t trials, const std::string& strategy_spec,
              const std::string& out_path) {
  const StatePair pair = load_pair(in);
  const OptimizerOptions opts = optimizer_options(in, 0x5E);
  const Strategy strategy = build_strategy(strategy_spec, pair, opts);
  const DriftRates drifts = strategy_drifts(strategy, pair);
  if (tau_frac > 0.0) tau = tau_frac * std::min(drifts.under_h0, drifts.under_h1);

  std::vector<long> n_values;
  for (const std::string& item : split(n_list, ',')) n_values.push_back(std::stol(item));

  const std::vector<SweepRow> rows = exponent_sweep(
      pair, strategy, n_values, tau, trials, in.seed, drifts.under_h1, drifts.under_h0,
      in.threads);
  write_output(out_path, sweep_table_csv(rows));
  if (is_file_path(out_path)) {
    ordered_json config = input_echo(in);
    config["n_values"] = n_list;
    config["tau"] = tau;
    config["trials"] = trials;
    config["strategy"] = strategy_spec;
    emit_run_record("sweep", std::move(config), {{"csv", out_path}});
  }
  return 0;
}

// --- region / sumrate ---------------------------------------------------

int cmd_region(const CommonInput& in, const std::string& mode, int angles,
               const std::string& out_path, const std::string& supports_path) {
  const StatePair pair = load_pair(in);
  const OptimizerOptions opts = optimizer_options(in, 0x4E);
  std::vector<RegionPolygon> polygons;
  if (mode == "adaptive" || mode == "both")
    polygons.push_back(adaptive_region(pair, opts));
  if (mode == "nonadaptive" || mode == "both")
    polygons.push_back(nonadaptive_region(pair, angles, opts));
  if (polygons.empty())
    throw Error(ErrorKind::Config, "mode must be adaptive, nonadaptive, or both");
  write_output(out_path, region_csv(polygons));
  if (!supports_path.empty()) {
    const RegionPolygon& last = polygons.back();
    if (last.kind != RegionKind::NonadaptiveHull)
      throw Error(ErrorKind::Config, "supports are only defined for the nonadaptive hull");
    write_output(supports_path, supports_csv(last));
  }
  if (is_file_path(out_path)) {
    ordered_json config = input_echo(in);
    config["mode"] = mode;
    config["angles"] = angles;
    std::vector<std::pair<std::string, std::string>> outputs{{"csv", out_path}};
    if (!supports_path.empty()) outputs.push_back({"supports_csv", supports_path});
    emit_run_record("region", std::move(config), outputs);
  }
  return 0;
}

int cmd_sumrate(const CommonInput& in, double theta_min, double theta_max, int points,
                const std::string& out_path) {
  if (points < 1) throw Error(ErrorKind::Config, "points must be >= 1");
  const OptimizerOptions opts = optimizer_options(in, 0x5A);
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0
                                 : static_cast<double>(i) / static_cast<double>(points - 1);
    grid.push_back(theta_min + t * (theta_max - theta_min));
  }
  const std::vector<SumRatePoint> curve = sumrate_sweep(in.r0, in.r1, grid, opts);
  write_output(out_path, sumrate_csv(curve));
  if (is_file_path(out_path)) {
    ordered_json config;
    config["r0"] = in.r0;
    config["r1"] = in.r1;
    config["theta_min"] = theta_min;
    config["theta_max"] = theta_max;
    config["points"] = points;
    config["seed"] = in.seed;
    config["restarts"] = in.restarts;
    emit_run_record("sumrate", std::move(config), {{"csv", out_path}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequential quantum hypothesis testing toolkit"};
  app.require_subcommand(1);

  CommonInput din, sin, swin, rin, srin;
  int block_l = 1;
  bool bits = false;
  std::string div_out;
  auto* divergence = app.add_subcommand("divergence", "divergence report for a state pair");
  add_state_options(divergence, din);
  add_common_options(divergence, din);
  divergence->add_option("--block", block_l, "also report l-fold block rates")->default_val(1);
  divergence->add_flag("--bits", bits, "additionally display values in bits");
  divergence->add_option("--out", div_out, "output path (default stdout)");

  long sim_n = 1;
  double sim_tau = 0.0, sim_tau_frac = 0.0;
  std::uint64_t sim_trials = 1;
  std::string sim_strategy = "adaptive", sim_traj, sim_out;
  auto* simulate = app.add_subcommand("simulate", "batched sequential tests");
  add_state_options(simulate, sin);
  add_common_options(simulate, sin);
  simulate->add_option("--n", sim_n, "sample budget")->required();
  auto* tau_opt = simulate->add_option("--tau", sim_tau, "threshold slack in nats");
  simulate->add_option("--tau-frac", sim_tau_frac, "tau as a fraction of the slower drift")
      ->excludes(tau_opt);
  simulate->add_option("--trials", sim_trials, "trials per hypothesis")->required();
  simulate->add_option("--strategy", sim_strategy,
                       "adaptive | fixed:<src> | cyclic:<src,...>:<r,...> "
                       "(src: optimal01, optimal10, or a POVM JSON file)");
  simulate->add_option("--trajectories", sim_traj, "trajectory CSV path");
  simulate->add_option("--out", sim_out, "output path (default stdout)");

  std::string sweep_ns = "20,40,80";
  double sweep_tau = 0.0, sweep_tau_frac = 0.0;
  std::uint64_t sweep_trials = 10000;
  std::string sweep_strategy = "adaptive", sweep_out;
  auto* sweep = app.add_subcommand("sweep", "error exponents across sample budgets");
  add_state_options(sweep, swin);
  add_common_options(sweep, swin);
  sweep->add_option("--n-values", sweep_ns, "comma-separated ascending budgets");
  auto* sweep_tau_opt = sweep->add_option("--tau", sweep_tau, "threshold slack in nats");
  sweep->add_option("--tau-frac", sweep_tau_frac, "tau as a fraction of the slower drift")
      ->excludes(sweep_tau_opt);
  sweep->add_option("--trials", sweep_trials, "trials per hypothesis per budget");
  sweep->add_option("--strategy", sweep_strategy, "strategy spec");
  sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");

  std::string region_mode = "both", region_out, region_supports;
  int region_angles = 64;
  auto* region = app.add_subcommand("region", "achievable error-exponent regions");
  add_state_options(region, rin);
  add_common_options(region, rin);
  region->add_option("--mode", region_mode, "adaptive, nonadaptive, or both");
  region->add_option("--angles", region_angles, "supporting hyperplane count")->default_val(64);
  region->add_option("--out", region_out, "region CSV path (default stdout)");
  region->add_option("--supports-out", region_supports, "supports CSV path");

  double sr_theta_min = 0.05, sr_theta_max = 1.57;
  int sr_points = 50;
  std::string sr_out;
  auto* sumrate = app.add_subcommand("sumrate", "sum-rate curves over the qubit family");
  add_common_options(sumrate, srin);
  sumrate->add_option("--r0", srin.r0, "family parameter r0")->required();
  sumrate->add_option("--r1", srin.r1, "family parameter r1")->required();
  sumrate->add_option("--theta-min", sr_theta_min, "grid start");
  sumrate->add_option("--theta-max", sr_theta_max, "grid end");
  sumrate->add_option("--points", sr_points, "grid size")->default_val(50);
  sumrate->add_option("--out", sr_out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  }

  try {
    if (divergence->parsed()) {
      din.threads = resolve_thread_cap(divergence, din.threads);
      return cmd_divergence(din, block_l, bits, div_out);
    }
    if (simulate->parsed()) {
      sin.threads = resolve_thread_cap(simulate, sin.threads);
      if (sim_tau <= 0.0 && sim_tau_frac <= 0.0)
        throw Error(ErrorKind::Config, "provide --tau or --tau-frac");
      return cmd_simulate(sin, sim_n, sim_tau, sim_tau_frac, sim_trials, sim_strategy,
                          sim_traj, sim_out);
    }
    if (sweep->parsed()) {
      swin.threads = resolve_thread_cap(sweep, swin.threads);
      if (sweep_tau <= 0.0 && sweep_tau_frac <= 0.0)
        throw Error(ErrorKind::Config, "provide --tau or --tau-frac");
      return cmd_sweep(swin, sweep_ns, sweep_tau, sweep_tau_frac, sweep_trials,
                       sweep_strategy, sweep_out);
    }
    if (region->parsed()) {
      rin.threads = resolve_thread_cap(region, rin.threads);
      return cmd_region(rin, region_mode, region_angles, region_out, region_supports);
    }
    if (sumrate->parsed()) {
      srin.threads = resolve_thread_cap(sumrate, srin.threads);
      return cmd_sumrate(srin, sr_theta_min, sr_theta_max, sr_points, sr_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Internal ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
