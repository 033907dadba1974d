#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "udn/config.hpp"

namespace udn {

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { kCsv, kJson };

struct SweepScenario {
  std::string name;
  ScenarioConfig config;
};

/// Re-run a point with more trials when its CI is too wide.
struct EscalationPolicy {
  bool enabled = true;
  double ci95_threshold = 0.02;
  std::uint64_t factor = 4;
  std::uint64_t max_trials = 40000;
};

struct SweepSpec {
  std::vector<double> lambda_grid;
  std::vector<SweepScenario> scenarios;
  std::filesystem::path output_path;  // empty: keep results in memory only
  OutputFormat format = OutputFormat::kCsv;
  std::uint64_t master_seed = 1;
  std::optional<std::uint64_t> trials;  // overrides every scenario's count
  EscalationPolicy escalation;
  unsigned workers = 0;
  bool clopper_pearson = false;
  bool record_wall_time = false;  // wall_s stays 0 otherwise, keeping reruns byte-identical
  bool resume = false;
  bool per_scenario_files = true;
};

struct SweepResultRow {
  std::string scenario;
  double lambda = 0.0;
  double p_cov = 0.0;
  double ci95 = 0.0;
  double active_fraction = 0.0;
  double tx_power_dbm = 0.0;
  std::uint64_t trials = 0;
  double wall_s = 0.0;
  std::string status = "ok";

  friend bool operator==(const SweepResultRow&, const SweepResultRow&) = default;
};

inline constexpr std::string_view kCsvHeader =
    "scenario,lambda_bs_per_km2,p_cov,ci95,active_fraction,tx_power_dbm,trials,wall_s,status";

/// 10^(lo + k / per_decade) for every k that stays within [10^lo, 10^hi].
std::vector<double> log_grid(double lambda_min, double lambda_max, int points_per_decade);

/// Four points per decade over [1e-1, 1e6].
std::vector<double> default_lambda_grid();

/// Throws SweepError on an empty or non-increasing grid, duplicate or
/// malformed scenario names, or an invalid scenario config.
void validate_spec(const SweepSpec& spec);

/// JSON sweep description:
/// {"lambda_grid": [...], "master_seed": 42, "trials": 2000,
///  "scenarios": [{"name": "a", "preset": "fig1_ws1"},
///                {"name": "b", "config": "path/to/file.cfg"}]}
/// Relative config paths resolve against the spec file's directory.
SweepSpec load_sweep_spec(const std::filesystem::path& path);

using SweepLog = std::function<void(const std::string&)>;

/// Runs every (scenario, lambda) point in scenario-then-grid order. Each
/// finished point is appended to `<output>.journal.csv`; with spec.resume,
/// journal and existing output rows with status ok are reused instead of
/// recomputed. Per-point failures land in the status column. When an output
/// path is set, the final table, per-scenario curve files and a
/// `<output>.meta.json` sidecar are written and the journal is removed.
std::vector<SweepResultRow> run_sweep(const SweepSpec& spec, const SweepLog& log = {});

std::string rows_to_csv(const std::vector<SweepResultRow>& rows);
std::vector<SweepResultRow> rows_from_csv(std::string_view text);
std::string rows_to_json(const std::vector<SweepResultRow>& rows);
std::vector<SweepResultRow> rows_from_json(std::string_view text);

/// Throws SweepError naming the path on I/O failure.
void emit_results(const std::vector<SweepResultRow>& rows, const std::filesystem::path& path, OutputFormat format);

}  // namespace udn
