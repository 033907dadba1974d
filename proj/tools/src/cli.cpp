#include "udn/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "udn/config.hpp"
#include "udn/deployment.hpp"
#include "udn/metrics.hpp"
#include "udn/sweep.hpp"

namespace udn {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepArgs {
  std::vector<std::string> presets;
  std::vector<std::string> configs;
  std::string spec_file;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<std::uint64_t> trials;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  int per_decade = 4;
  std::vector<double> lambdas;
  bool resume = false;
  bool wall_time = false;
  unsigned workers = 0;
  bool clopper_pearson = false;
  bool no_escalation = false;
  std::optional<double> ci_threshold;
  std::optional<std::uint64_t> max_trials;
  bool quiet = false;
};

struct OracleArgs {
  std::uint64_t trials = 20000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double tolerance = 0.015;
  double invariance_tolerance = 0.02;
  bool skip_invariance = false;
};

struct PowerArgs {
  double lambda_min = 0.1;
  double lambda_max = 1e6;
  int per_decade = 4;
  double edge_snr_db = 15.0;
  double noise_dbm = -95.0;
};

struct DumpArgs {
  std::string preset;
  std::string config;
  double lambda = 0.0;
  std::uint64_t trial = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

OutputFormat parse_format(const std::string& name, const std::string& out_path) {
  std::string f = name;
  if (f.empty()) f = std::filesystem::path(out_path).extension() == ".json" ? "json" : "csv";
  if (f == "csv") return OutputFormat::kCsv;
  if (f == "json") return OutputFormat::kJson;
  throw UsageError(fmt::format("unknown format '{}' (expected csv or json)", name));
}

ScenarioConfig scenario_from(const std::string& preset_name, const std::string& config_path) {
  if (!preset_name.empty() && !config_path.empty()) throw UsageError("give either --preset or --config, not both");
  if (!preset_name.empty()) return preset(preset_name);
  if (!config_path.empty()) return load_config_file(config_path);
  throw UsageError("one of --preset or --config is required");
}

std::vector<SweepScenario> scenarios_from(const SweepArgs& a) {
  std::vector<SweepScenario> out;
  for (const auto& p : a.presets) {
    if (auto group = preset_group(p)) {
      for (const auto& name : *group) out.push_back({name, preset(name)});
    } else {
      out.push_back({p, preset(p)});
    }
  }
  for (const auto& c : a.configs) {
    out.push_back({std::filesystem::path(c).stem().string(), load_config_file(c)});
  }
  return out;
}

SweepSpec build_spec(const SweepArgs& a) {
  SweepSpec spec;
  if (!a.spec_file.empty()) {
    spec = load_sweep_spec(a.spec_file);
  } else {
    spec.lambda_grid = default_lambda_grid();
  }
  auto extra = scenarios_from(a);
  spec.scenarios.insert(spec.scenarios.end(), extra.begin(), extra.end());
  if (spec.scenarios.empty()) throw UsageError("no scenarios: pass --preset, --config or --spec");

  if (!a.lambdas.empty()) {
    spec.lambda_grid = a.lambdas;
  } else if (a.lambda_min || a.lambda_max || a.per_decade != 4) {
    spec.lambda_grid = log_grid(a.lambda_min.value_or(0.1), a.lambda_max.value_or(1e6), a.per_decade);
  }
  if (a.seed) spec.master_seed = *a.seed;
  if (a.trials) spec.trials = *a.trials;
  spec.output_path = a.out;
  spec.format = parse_format(a.format, a.out);
  spec.workers = a.workers;
  spec.clopper_pearson = a.clopper_pearson;
  spec.record_wall_time = a.wall_time;
  spec.resume = a.resume;
  if (a.no_escalation) spec.escalation.enabled = false;
  if (a.ci_threshold) spec.escalation.ci95_threshold = *a.ci_threshold;
  if (a.max_trials) spec.escalation.max_trials = *a.max_trials;
  return spec;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  if (a.resume && a.out.empty()) throw UsageError("--resume needs --out");
  const SweepSpec spec = build_spec(a);
  SweepLog log;
  if (!a.quiet) log = [&err](const std::string& line) { err << line << '\n' << std::flush; };
  const auto rows = run_sweep(spec, log);
  if (a.out.empty()) {
    out << (spec.format == OutputFormat::kJson ? rows_to_json(rows) : rows_to_csv(rows));
  } else if (!a.quiet) {
    err << fmt::format("wrote {} rows to {}\n", rows.size(), a.out);
  }
  return 0;
}

int cmd_validate_oracle(const OracleArgs& a, std::ostream& out) {
  ScenarioConfig base = preset("oracle_single_slope");
  base.master_seed = a.seed;
  base.trials = a.trials;
  const ValidatedConfig cfg = validate(base);

  bool ok = true;
  auto verdict = [&](bool pass) {
    ok = ok && pass;
    return pass ? "PASS" : "FAIL";
  };

  std::map<double, std::vector<TrialOutcome>> runs;
  auto outcomes_at = [&](double lambda) -> const std::vector<TrialOutcome>& {
    auto it = runs.find(lambda);
    if (it == runs.end()) {
      const CoverageSimulator sim(with_density(cfg, lambda));
      it = runs.emplace(lambda, sim.run_trials(0, a.trials, a.workers)).first;
    }
    return it->second;
  };

  out << fmt::format("oracle: single slope alpha=4, Rayleigh, all BSs active, no noise, {} trials, seed {}\n", a.trials,
                     a.seed);
  for (double gamma_db : {0.0, 10.0}) {
    const double gamma = db_to_linear(gamma_db);
    const double expected = oracle_coverage_single_slope(gamma);
    const auto est = summarize(outcomes_at(100.0), gamma, 100.0, cfg->name);
    const double diff = std::abs(est.p_hat - expected);
    out << fmt::format("  gamma={:>4} dB  oracle={:.4f}  p_hat={:.4f} +/- {:.4f}  |diff|={:.4f}  tol={}  {}\n", gamma_db,
                       expected, est.p_hat, est.ci95_halfwidth, diff, a.tolerance, verdict(diff < a.tolerance));
  }
  if (!a.skip_invariance) {
    std::vector<double> p;
    for (double lambda : {10.0, 100.0, 1000.0}) {
      p.push_back(summarize(outcomes_at(lambda), cfg->sinr_threshold, lambda, cfg->name).p_hat);
    }
    double spread = 0.0;
    for (double x : p) {
      for (double y : p) spread = std::max(spread, std::abs(x - y));
    }
    out << fmt::format("  density invariance lambda={{10,100,1000}}  p_hat={{{:.4f},{:.4f},{:.4f}}}  max|diff|={:.4f}  "
                       "tol={}  {}\n",
                       p[0], p[1], p[2], spread, a.invariance_tolerance, verdict(spread < a.invariance_tolerance));
  }
  out << (ok ? "oracle suite: PASS\n" : "oracle suite: FAIL\n");
  return ok ? 0 : 1;
}

int cmd_power_curve(const PowerArgs& a, std::ostream& out) {
  if (!(a.lambda_min > 0.0) || !(a.lambda_max >= a.lambda_min)) {
    throw UsageError("need 0 < --lambda-min <= --lambda-max");
  }
  if (a.per_decade < 1) throw UsageError("--points-per-decade must be >= 1");
  const PowerMode mode = DensityDependentPower{a.edge_snr_db};
  const PathLossModel model = PathLossModel::three_gpp();
  out << "lambda_bs_per_km2,tx_power_dbm\n";
  for (double lambda : log_grid(a.lambda_min, a.lambda_max, a.per_decade)) {
    out << fmt::format("{},{}\n", lambda, tx_power_dbm(mode, lambda, model, a.noise_dbm));
  }
  return 0;
}

int cmd_dump(const DumpArgs& a, std::ostream& out, std::ostream& err) {
  ScenarioConfig sc = scenario_from(a.preset, a.config);
  if (a.lambda > 0.0) sc.bs_density_per_km2 = a.lambda;
  if (a.seed) sc.master_seed = *a.seed;
  const CoverageSimulator sim(validate(std::move(sc)));
  const Deployment dep = sim.deployment(a.trial);
  err << fmt::format("region radius {} km, {} BSs, {} UEs\n", sim.region().radius_km, dep.bs_positions.size(),
                     dep.ue_positions.size());
  if (a.out.empty() || a.out == "-") {
    write_deployment_csv(out, dep);
    return 0;
  }
  std::ofstream f(a.out);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", a.out));
  write_deployment_csv(f, dep);
  return f ? 0 : 1;
}

int cmd_preset(const std::string& name, std::ostream& out) {
  if (name.empty()) {
    for (const auto& n : preset_names()) out << n << '\n';
    out << "fig1_all\nfig3_all\n";
    return 0;
  }
  out << emit_config(preset(name));
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo coverage simulator for dense small-cell networks", "udnsim"};
  app.require_subcommand(1);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Coverage probability over a BS density grid");
  sweep->add_option("--preset", sw.presets, "Preset or preset group (fig1_all, fig3_all); repeatable");
  sweep->add_option("--config", sw.configs, "Scenario config file; repeatable")->check(CLI::ExistingFile);
  sweep->add_option("--spec", sw.spec_file, "JSON sweep description")->check(CLI::ExistingFile);
  sweep->add_option("--seed", sw.seed, "Master seed");
  sweep->add_option("--out", sw.out, "Output file; stdout when omitted");
  sweep->add_option("--format", sw.format, "csv or json (default from --out extension)");
  sweep->add_option("--trials", sw.trials, "Trials per point, overriding the scenarios")->check(CLI::PositiveNumber);
  sweep->add_option("--lambda-min", sw.lambda_min, "Grid start, BSs/km^2")->check(CLI::PositiveNumber);
  sweep->add_option("--lambda-max", sw.lambda_max, "Grid end, BSs/km^2")->check(CLI::PositiveNumber);
  sweep->add_option("--points-per-decade", sw.per_decade, "Grid resolution")->check(CLI::PositiveNumber);
  sweep->add_option("--lambdas", sw.lambdas, "Explicit density list")->delimiter(',');
  sweep->add_flag("--resume", sw.resume, "Reuse finished points from an interrupted run");
  sweep->add_flag("--record-wall-time", sw.wall_time, "Fill the wall_s column");
  sweep->add_option("--workers", sw.workers, "Worker threads (default: UDN_WORKERS or all cores)");
  sweep->add_flag("--clopper-pearson", sw.clopper_pearson, "Exact binomial CI half-widths");
  sweep->add_flag("--no-escalation", sw.no_escalation, "Never add trials to wide-CI points");
  sweep->add_option("--ci-threshold", sw.ci_threshold, "Escalate points whose ci95 exceeds this");
  sweep->add_option("--max-trials", sw.max_trials, "Escalation cap per point");
  sweep->add_flag("-q,--quiet", sw.quiet, "No progress log");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("validate-oracle", "Check the simulator against closed-form coverage");
  oracle->add_option("--trials", oa.trials, "Trials per density")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", oa.seed, "Master seed");
  oracle->add_option("--workers", oa.workers, "Worker threads");
  oracle->add_option("--tolerance", oa.tolerance, "Allowed |p_hat - oracle|");
  oracle->add_flag("--skip-invariance", oa.skip_invariance, "Only run the closed-form comparison");

  PowerArgs pa;
  auto* power = app.add_subcommand("power-curve", "Density-dependent transmit power table");
  power->add_option("--lambda-min", pa.lambda_min)->check(CLI::PositiveNumber);
  power->add_option("--lambda-max", pa.lambda_max)->check(CLI::PositiveNumber);
  power->add_option("--points-per-decade", pa.per_decade)->check(CLI::PositiveNumber);
  power->add_option("--edge-snr-db", pa.edge_snr_db, "Target SNR at the typical cell edge");
  power->add_option("--noise-dbm", pa.noise_dbm, "Noise power");

  DumpArgs da;
  auto* dump = app.add_subcommand("dump-deployment", "Write one trial's BS and UE positions as CSV");
  dump->add_option("--preset", da.preset);
  dump->add_option("--config", da.config)->check(CLI::ExistingFile);
  dump->add_option("--lambda", da.lambda, "BS density override")->check(CLI::PositiveNumber);
  dump->add_option("--trial", da.trial, "Trial index");
  dump->add_option("--seed", da.seed, "Master seed");
  dump->add_option("--out", da.out, "Output file; stdout when omitted");

  std::string preset_name;
  auto* show = app.add_subcommand("preset", "List presets, or print one as a config file");
  show->add_option("name", preset_name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*sweep) return cmd_sweep(sw, out, err);
    if (*oracle) return cmd_validate_oracle(oa, out);
    if (*power) return cmd_power_curve(pa, out);
    if (*dump) return cmd_dump(da, out, err);
    if (*show) return cmd_preset(preset_name, out);
  } catch (const UsageError& e) {
    err << "udnsim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "udnsim: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace udn
