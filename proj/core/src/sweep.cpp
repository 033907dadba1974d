#include "udn/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "udn/metrics.hpp"
#include "udn/parallel.hpp"

namespace udn {

namespace {

using Key = std::pair<std::string, double>;

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_num(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw SweepError(fmt::format("line {}: '{}' is not a number", line, s));
  }
  return v;
}

std::string sanitize_status(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

std::string csv_line(const SweepResultRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}\n", r.scenario, num(r.lambda), num(r.p_cov), num(r.ci95),
                     num(r.active_fraction), num(r.tx_power_dbm), r.trials, num(r.wall_s), r.status);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SweepError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SweepError(fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    if (!out) throw SweepError(fmt::format("write failed for '{}'", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw SweepError(fmt::format("cannot move '{}' to '{}': {}", tmp.string(), path.string(), ec.message()));
}

std::filesystem::path sibling(const std::filesystem::path& out, std::string_view suffix) {
  auto p = out;
  p += suffix;
  return p;
}

std::filesystem::path curve_path(const std::filesystem::path& out, const std::string& scenario) {
  auto p = out;
  p.replace_filename(fmt::format("{}.{}{}", out.stem().string(), scenario, out.extension().string()));
  return p;
}

std::vector<SweepResultRow> read_rows(const std::filesystem::path& path, OutputFormat format) {
  const std::string text = read_file(path);
  return format == OutputFormat::kJson ? rows_from_json(text) : rows_from_csv(text);
}

}  // namespace

std::vector<double> log_grid(double lambda_min, double lambda_max, int points_per_decade) {
  if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min) || points_per_decade < 1) {
    throw SweepError("log grid needs 0 < min <= max and at least one point per decade");
  }
  const double lo = std::log10(lambda_min);
  const double hi = std::log10(lambda_max);
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double e = lo + static_cast<double>(k) / points_per_decade;
    if (e > hi + 1e-9) break;
    grid.push_back(std::pow(10.0, e));
  }
  return grid;
}

std::vector<double> default_lambda_grid() { return log_grid(0.1, 1e6, 4); }

void validate_spec(const SweepSpec& spec) {
  if (spec.lambda_grid.empty()) throw SweepError("lambda_grid is empty");
  for (std::size_t i = 0; i < spec.lambda_grid.size(); ++i) {
    const double l = spec.lambda_grid[i];
    if (!(l > 0.0) || !std::isfinite(l)) throw SweepError(fmt::format("lambda_grid[{}] must be > 0", i));
    if (i > 0 && !(l > spec.lambda_grid[i - 1])) throw SweepError("lambda_grid must be strictly increasing");
  }
  if (spec.scenarios.empty()) throw SweepError("no scenarios");
  std::set<std::string> names;
  for (const auto& s : spec.scenarios) {
    if (s.name.empty() || s.name.find_first_of(",\n\r\"/ ") != std::string::npos) {
      throw SweepError(fmt::format("invalid scenario name '{}'", s.name));
    }
    if (!names.insert(s.name).second) throw SweepError(fmt::format("duplicate scenario name '{}'", s.name));
    if (auto errs = check(s.config); !errs.empty()) {
      throw SweepError(fmt::format("scenario '{}': {}", s.name, ValidationError(errs).what()));
    }
  }
  if (spec.trials && *spec.trials == 0) throw SweepError("trials must be >= 1");
  if (spec.escalation.enabled && spec.escalation.factor < 1) throw SweepError("escalation factor must be >= 1");
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SweepError(fmt::format("{}: {}", path.string(), e.what()));
  }
  SweepSpec spec;
  try {
    spec.lambda_grid = j.contains("lambda_grid") ? j.at("lambda_grid").get<std::vector<double>>()
                                                 : default_lambda_grid();
    if (j.contains("master_seed")) spec.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("trials")) spec.trials = j.at("trials").get<std::uint64_t>();
    for (const auto& s : j.at("scenarios")) {
      SweepScenario sc;
      if (s.contains("preset")) {
        sc.config = preset(s.at("preset").get<std::string>());
      } else {
        std::filesystem::path cfg_path = s.at("config").get<std::string>();
        if (cfg_path.is_relative()) cfg_path = path.parent_path() / cfg_path;
        sc.config = load_config_file(cfg_path.string());
      }
      sc.name = s.contains("name") ? s.at("name").get<std::string>() : sc.config.name;
      spec.scenarios.push_back(std::move(sc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SweepError(fmt::format("{}: {}", path.string(), e.what()));
  } catch (const ConfigParseError& e) {
    throw SweepError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return spec;
}

std::vector<SweepResultRow> run_sweep(const SweepSpec& spec, const SweepLog& log) {
  validate_spec(spec);
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  const bool to_disk = !spec.output_path.empty();
  const auto journal_path = sibling(spec.output_path, ".journal.csv");

  std::map<Key, SweepResultRow> done;
  if (to_disk && spec.resume) {
    auto absorb = [&](const std::vector<SweepResultRow>& rows) {
      for (const auto& r : rows) {
        if (r.status == "ok") done.insert_or_assign(Key{r.scenario, r.lambda}, r);
      }
    };
    if (std::filesystem::exists(spec.output_path)) absorb(read_rows(spec.output_path, spec.format));
    if (std::filesystem::exists(journal_path)) absorb(rows_from_csv(read_file(journal_path)));
    say(fmt::format("resume: {} completed points found", done.size()));
  }

  std::ofstream journal;
  if (to_disk) {
    const bool fresh = !spec.resume || !std::filesystem::exists(journal_path);
    journal.open(journal_path, fresh ? std::ios::trunc : std::ios::app);
    if (!journal) throw SweepError(fmt::format("cannot write '{}'", journal_path.string()));
    if (fresh) journal << kCsvHeader << '\n' << std::flush;
  }

  const unsigned workers = resolve_workers(spec.workers);
  nlohmann::json meta_points = nlohmann::json::array();
  std::vector<SweepResultRow> rows;
  std::uint64_t executed = 0;
  std::uint64_t planned = 0;

  for (const auto& sc : spec.scenarios) {
    for (double lambda : spec.lambda_grid) {
      const std::uint64_t base_trials = spec.trials.value_or(sc.config.trials);
      if (auto it = done.find(Key{sc.name, lambda}); it != done.end()) {
        rows.push_back(it->second);
        meta_points.push_back({{"scenario", sc.name}, {"lambda", lambda}, {"reused", true}});
        continue;
      }
      planned += base_trials;
      SweepResultRow row;
      row.scenario = sc.name;
      row.lambda = lambda;
      const auto t0 = std::chrono::steady_clock::now();
      std::uint64_t point_trials = 0;
      try {
        ScenarioConfig cfg = sc.config;
        cfg.bs_density_per_km2 = lambda;
        cfg.master_seed = spec.master_seed;
        cfg.trials = base_trials;
        const CoverageSimulator sim(validate(std::move(cfg)));
        auto outcomes = sim.run_trials(0, base_trials, workers);
        point_trials = base_trials;
        auto est = summarize(outcomes, sim.config()->sinr_threshold, lambda, sc.name, spec.clopper_pearson);
        const auto& esc = spec.escalation;
        if (esc.enabled && est.ci95_halfwidth > esc.ci95_threshold && esc.factor > 1) {
          const std::uint64_t target = std::min(esc.max_trials, base_trials * esc.factor);
          if (target > base_trials) {
            auto more = sim.run_trials(base_trials, target - base_trials, workers);
            outcomes.insert(outcomes.end(), more.begin(), more.end());
            point_trials = target;
            est = summarize(outcomes, sim.config()->sinr_threshold, lambda, sc.name, spec.clopper_pearson);
            say(fmt::format("{} lambda={}: ci95 above {}, escalated to {} trials", sc.name, num(lambda),
                            num(esc.ci95_threshold), target));
          }
        }
        row.p_cov = est.p_hat;
        row.ci95 = est.ci95_halfwidth;
        row.active_fraction = est.active_fraction;
        row.tx_power_dbm = mw_to_dbm(sim.tx_power_mw());
        row.trials = est.trials;
      } catch (const std::exception& e) {
        row.p_cov = row.ci95 = row.active_fraction = row.tx_power_dbm = std::nan("");
        row.trials = point_trials;
        row.status = sanitize_status(fmt::format("error: {}", e.what()));
      }
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (spec.record_wall_time) row.wall_s = wall;
      executed += point_trials;
      say(fmt::format("{} lambda={} p_cov={} ci95={} trials={} ({:.2f} s) {}", sc.name, num(lambda), num(row.p_cov),
                      num(row.ci95), row.trials, wall, row.status));
      if (to_disk) journal << csv_line(row) << std::flush;
      meta_points.push_back({{"scenario", sc.name},
                             {"lambda", lambda},
                             {"trials", row.trials},
                             {"wall_s", wall},
                             {"reused", false},
                             {"status", row.status}});
      rows.push_back(std::move(row));
    }
  }
  say(fmt::format("accounting: {} trials executed, {} planned before escalation ({} points x base trials)", executed,
                  planned, meta_points.size()));

  if (to_disk) {
    journal.close();
    emit_results(rows, spec.output_path, spec.format);
    if (spec.per_scenario_files) {
      for (const auto& sc : spec.scenarios) {
        std::vector<SweepResultRow> curve;
        for (const auto& r : rows) {
          if (r.scenario == sc.name) curve.push_back(r);
        }
        emit_results(curve, curve_path(spec.output_path, sc.name), spec.format);
      }
    }
    nlohmann::json meta{{"master_seed", spec.master_seed},
                        {"trial_seed_rule", "trial_seed = derive_seed(master_seed, trial_index)"},
                        {"workers", workers},
                        {"trials_executed", executed},
                        {"points", meta_points}};
    write_file_atomic(sibling(spec.output_path, ".meta.json"), meta.dump(2) + "\n");
    std::filesystem::remove(journal_path);
  }
  return rows;
}

std::string rows_to_csv(const std::vector<SweepResultRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) out += csv_line(r);
  return out;
}

std::vector<SweepResultRow> rows_from_csv(std::string_view text) {
  std::vector<SweepResultRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw SweepError(fmt::format("line {}: unexpected CSV header", line_no));
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> f;
    while (true) {
      const auto c = line.find(',');
      f.push_back(line.substr(0, c));
      if (c == std::string_view::npos) break;
      line = line.substr(c + 1);
    }
    if (f.size() != 9) throw SweepError(fmt::format("line {}: expected 9 fields, got {}", line_no, f.size()));
    SweepResultRow r;
    r.scenario = std::string(f[0]);
    r.lambda = parse_num(f[1], line_no);
    r.p_cov = parse_num(f[2], line_no);
    r.ci95 = parse_num(f[3], line_no);
    r.active_fraction = parse_num(f[4], line_no);
    r.tx_power_dbm = parse_num(f[5], line_no);
    auto res = std::from_chars(f[6].data(), f[6].data() + f[6].size(), r.trials);
    if (res.ec != std::errc{} || res.ptr != f[6].data() + f[6].size()) {
      throw SweepError(fmt::format("line {}: bad trial count '{}'", line_no, f[6]));
    }
    r.wall_s = parse_num(f[7], line_no);
    r.status = std::string(f[8]);
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw SweepError("missing CSV header");
  return rows;
}

namespace {

// JSON has no NaN; non-finite values travel as their to_chars spelling.
nlohmann::json json_num(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

double from_json_num(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  return parse_num(j.get<std::string>(), 0);
}

}  // namespace

std::string rows_to_json(const std::vector<SweepResultRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"scenario", r.scenario},
                   {"lambda_bs_per_km2", json_num(r.lambda)},
                   {"p_cov", json_num(r.p_cov)},
                   {"ci95", json_num(r.ci95)},
                   {"active_fraction", json_num(r.active_fraction)},
                   {"tx_power_dbm", json_num(r.tx_power_dbm)},
                   {"trials", r.trials},
                   {"wall_s", json_num(r.wall_s)},
                   {"status", r.status}});
  }
  return arr.dump(2) + "\n";
}

std::vector<SweepResultRow> rows_from_json(std::string_view text) {
  std::vector<SweepResultRow> rows;
  try {
    for (const auto& o : nlohmann::json::parse(text)) {
      SweepResultRow r;
      r.scenario = o.at("scenario").get<std::string>();
      r.lambda = from_json_num(o.at("lambda_bs_per_km2"));
      r.p_cov = from_json_num(o.at("p_cov"));
      r.ci95 = from_json_num(o.at("ci95"));
      r.active_fraction = from_json_num(o.at("active_fraction"));
      r.tx_power_dbm = from_json_num(o.at("tx_power_dbm"));
      r.trials = o.at("trials").get<std::uint64_t>();
      r.wall_s = from_json_num(o.at("wall_s"));
      r.status = o.at("status").get<std::string>();
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SweepError(fmt::format("malformed results JSON: {}", e.what()));
  }
  return rows;
}

void emit_results(const std::vector<SweepResultRow>& rows, const std::filesystem::path& path, OutputFormat format) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw SweepError(fmt::format("cannot create directory for '{}': {}", path.string(), ec.message()));
  }
  write_file_atomic(path, format == OutputFormat::kJson ? rows_to_json(rows) : rows_to_csv(rows));
}

}  // namespace udn
