#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "udn/channel.hpp"

namespace udn {

/// UE density in UEs/km^2, or the "infinite" sentinel meaning every BS is
/// active and no UEs are dropped.
class UeDensity {
 public:
  static UeDensity infinite() { return UeDensity(); }
  static UeDensity finite(double per_km2) { return UeDensity(per_km2); }

  bool is_infinite() const { return !value_.has_value(); }
  /// Precondition: !is_infinite().
  double per_km2() const { return *value_; }

  friend bool operator==(const UeDensity&, const UeDensity&) = default;

 private:
  UeDensity() = default;
  explicit UeDensity(double v) : value_(v) {}
  std::optional<double> value_;
};

struct Shadowing {
  double sigma_db = 10.0;
  double corr_tau = 0.5;
  friend bool operator==(const Shadowing&, const Shadowing&) = default;
};

enum class CountMode { kPoisson, kDeterministic };

/// Every physical parameter and factor toggle of one scenario. Together with
/// master_seed it fully determines a sweep point.
struct ScenarioConfig {
  std::string name = "custom";
  double bs_density_per_km2 = 100.0;
  UeDensity ue_density = UeDensity::infinite();
  double antenna_height_diff_km = 0.0;
  double sinr_threshold = 1.0;  // linear
  double noise_power_dbm = -95.0;  // -inf disables noise
  PathLossModel path_loss = PathLossModel::three_gpp();
  FadingSpec fading;
  std::optional<Shadowing> shadowing;
  bool shadowing_in_association = true;
  PowerMode power = ConstantPower{24.0};
  CountMode count_mode = CountMode::kPoisson;
  double region_target_active_bs = 1000.0;
  double min_region_radius_km = 0.0;
  double all_active_ratio = 100.0;
  std::uint32_t association_candidates = 10;
  std::uint64_t trials = 10000;
  std::uint64_t master_seed = 1;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct FieldError {
  std::string field;
  std::string message;
};

/// Raised by validate(); carries one entry per violated field.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<FieldError> errors);
  const std::vector<FieldError>& errors() const { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

/// Raised by parse_config() and preset() on malformed input.
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A ScenarioConfig known to satisfy every invariant. Immutable.
class ValidatedConfig {
 public:
  const ScenarioConfig& get() const { return cfg_; }
  const ScenarioConfig* operator->() const { return &cfg_; }

 private:
  friend ValidatedConfig validate(ScenarioConfig cfg);
  explicit ValidatedConfig(ScenarioConfig cfg) : cfg_(std::move(cfg)) {}
  ScenarioConfig cfg_;
};

std::vector<FieldError> check(const ScenarioConfig& cfg);

/// Throws ValidationError listing every violated field.
ValidatedConfig validate(ScenarioConfig cfg);

/// Copy of cfg at a different BS density, revalidated.
ValidatedConfig with_density(const ValidatedConfig& cfg, double bs_density_per_km2);

/// Named presets: fig1_ws1, fig1_ws1_ws2, fig1_ns1_L0, fig1_ns1_L85,
/// fig3_ws1, fig3_ws1_ws2, fig3_ns1_L0, fig3_ns1_L85, fig3_all_minor,
/// oracle_single_slope.
ScenarioConfig preset(std::string_view name);
std::vector<std::string> preset_names();

/// Preset groups accepted by the CLI: fig1_all, fig3_all.
std::optional<std::vector<std::string>> preset_group(std::string_view name);

/// Canonical key/value text. parse_config(emit_config(c)) == c, and
/// emit_config(parse_config(t)) == t whenever t is canonical.
std::string emit_config(const ScenarioConfig& cfg);
ScenarioConfig parse_config(std::string_view text);

ScenarioConfig load_config_file(const std::string& path);

}  // namespace udn
