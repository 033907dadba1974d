#include "udn/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace udn {

namespace {

constexpr std::string_view kHeader = "# udnsim scenario config v1";

std::string join_errors(const std::vector<FieldError>& errors) {
  std::string out = "invalid scenario config:";
  for (const auto& e : errors) out += fmt::format(" {} {};", e.field, e.message);
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<FieldError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<FieldError> check(const ScenarioConfig& cfg) {
  std::vector<FieldError> errs;
  auto fail = [&](std::string field, std::string msg) { errs.push_back({std::move(field), std::move(msg)}); };

  if (cfg.name.empty() || cfg.name.find_first_of(",\n\r\" ") != std::string::npos) {
    fail("name", "must be non-empty without spaces, commas, quotes or newlines");
  }
  if (!(cfg.bs_density_per_km2 > 0.0) || !std::isfinite(cfg.bs_density_per_km2)) {
    fail("bs_density_lambda", "must be > 0");
  }
  if (!cfg.ue_density.is_infinite() &&
      (!(cfg.ue_density.per_km2() > 0.0) || !std::isfinite(cfg.ue_density.per_km2()))) {
    fail("ue_density_rho", "must be > 0 or infinite");
  }
  if (!(cfg.antenna_height_diff_km >= 0.0) || !std::isfinite(cfg.antenna_height_diff_km)) {
    fail("antenna_height_diff_L", "must be >= 0");
  }
  if (!(cfg.sinr_threshold > 0.0) || !std::isfinite(cfg.sinr_threshold)) {
    fail("sinr_threshold_gamma", "must be > 0");
  }
  if (std::isnan(cfg.noise_power_dbm) || cfg.noise_power_dbm == std::numeric_limits<double>::infinity()) {
    fail("noise_power_pn", "must be finite or -inf");
  }
  if (cfg.shadowing) {
    if (!(cfg.shadowing->sigma_db >= 0.0) || !std::isfinite(cfg.shadowing->sigma_db)) {
      fail("sigma_db", "must be >= 0");
    }
    if (!(cfg.shadowing->corr_tau >= 0.0 && cfg.shadowing->corr_tau <= 1.0)) {
      fail("corr_tau", "out of [0,1]");
    }
  }
  if (const auto* c = std::get_if<ConstantPower>(&cfg.power)) {
    if (!std::isfinite(c->dbm)) fail("tx_power_dbm", "must be finite");
  } else {
    const auto& dd = std::get<DensityDependentPower>(cfg.power);
    if (!std::isfinite(dd.edge_snr_db)) fail("edge_snr_db", "must be finite");
    if (!std::isfinite(cfg.noise_power_dbm)) {
      fail("power_mode", "density_dependent power needs a finite noise power");
    }
  }
  if (!(cfg.region_target_active_bs >= 1.0) || !std::isfinite(cfg.region_target_active_bs)) {
    fail("region_target_active_bs", "must be >= 1");
  }
  if (!(cfg.min_region_radius_km >= 0.0) || !std::isfinite(cfg.min_region_radius_km)) {
    fail("min_region_radius_km", "must be >= 0");
  }
  if (!(cfg.all_active_ratio > 0.0)) fail("all_active_ratio", "must be > 0");
  if (cfg.association_candidates < 1) fail("association_candidates", "must be >= 1");
  if (cfg.trials < 1) fail("trials", "must be >= 1");
  return errs;
}

ValidatedConfig validate(ScenarioConfig cfg) {
  auto errs = check(cfg);
  if (!errs.empty()) throw ValidationError(std::move(errs));
  return ValidatedConfig(std::move(cfg));
}

ValidatedConfig with_density(const ValidatedConfig& cfg, double bs_density_per_km2) {
  ScenarioConfig copy = cfg.get();
  copy.bs_density_per_km2 = bs_density_per_km2;
  return validate(std::move(copy));
}

// ---------------------------------------------------------------------------
// Presets

namespace {

constexpr double kHeightDiffKm = 0.0085;  // 10 m BS minus 1.5 m UE
constexpr double kUeDensity = 300.0;

ScenarioConfig base(std::string name, double height_km, UeDensity rho) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.antenna_height_diff_km = height_km;
  c.ue_density = rho;
  return c;
}

ScenarioConfig with_minor_factors(ScenarioConfig c) {
  c.fading.model = FadingModel::kRicianDistanceK;
  c.shadowing = Shadowing{10.0, 0.5};
  c.power = DensityDependentPower{15.0};
  c.count_mode = CountMode::kDeterministic;
  return c;
}

}  // namespace

ScenarioConfig preset(std::string_view name) {
  const auto finite = UeDensity::finite(kUeDensity);
  const auto inf = UeDensity::infinite();
  if (name == "fig1_ws1") return base("fig1_ws1", 0.0, inf);
  if (name == "fig1_ws1_ws2") return base("fig1_ws1_ws2", kHeightDiffKm, inf);
  if (name == "fig1_ns1_L0") return base("fig1_ns1_L0", 0.0, finite);
  if (name == "fig1_ns1_L85") return base("fig1_ns1_L85", kHeightDiffKm, finite);
  if (name == "fig3_ws1") return with_minor_factors(base("fig3_ws1", 0.0, inf));
  if (name == "fig3_ws1_ws2") return with_minor_factors(base("fig3_ws1_ws2", kHeightDiffKm, inf));
  if (name == "fig3_ns1_L0") return with_minor_factors(base("fig3_ns1_L0", 0.0, finite));
  if (name == "fig3_ns1_L85" || name == "fig3_all_minor") {
    return with_minor_factors(base(std::string(name), kHeightDiffKm, finite));
  }
  if (name == "oracle_single_slope") {
    ScenarioConfig c = base("oracle_single_slope", 0.0, inf);
    c.path_loss = PathLossModel::single_slope(std::pow(10.0, -14.54), 4.0);
    c.noise_power_dbm = -std::numeric_limits<double>::infinity();
    c.trials = 20000;
    return c;
  }
  throw ConfigParseError(fmt::format("unknown preset '{}'", name));
}

std::vector<std::string> preset_names() {
  return {"fig1_ws1",     "fig1_ws1_ws2", "fig1_ns1_L0",  "fig1_ns1_L85",   "fig3_ws1",
          "fig3_ws1_ws2", "fig3_ns1_L0",  "fig3_ns1_L85", "fig3_all_minor", "oracle_single_slope"};
}

std::optional<std::vector<std::string>> preset_group(std::string_view name) {
  if (name == "fig1_all") return std::vector<std::string>{"fig1_ws1", "fig1_ws1_ws2", "fig1_ns1_L0", "fig1_ns1_L85"};
  if (name == "fig3_all") return std::vector<std::string>{"fig3_ws1", "fig3_ws1_ws2", "fig3_ns1_L0", "fig3_ns1_L85"};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string num(std::uint64_t v) { return std::to_string(v); }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string law_text(const LosProbabilityLaw& law) {
  switch (law.kind) {
    case LosProbabilityLaw::Kind::kConstant:
      return "constant " + num(law.coeff);
    case LosProbabilityLaw::Kind::kOneMinusExpInverse:
      return "one_minus_exp_inverse " + num(law.coeff) + " " + num(law.scale_km);
    case LosProbabilityLaw::Kind::kExp:
      return "exp " + num(law.coeff) + " " + num(law.scale_km);
  }
  return {};
}

class KeyValues {
 public:
  explicit KeyValues(std::string_view text) {
    std::size_t line_no = 0;
    while (!text.empty()) {
      ++line_no;
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigParseError(fmt::format("line {}: expected 'key = value'", line_no));
      }
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigParseError(fmt::format("line {}: empty key", line_no));
      if (!values_.emplace(key, value).second) {
        throw ConfigParseError(fmt::format("line {}: duplicate key '{}'", line_no, key));
      }
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string v = std::move(it->second);
    values_.erase(it);
    return v;
  }

  std::string require(const std::string& key) {
    auto v = take(key);
    if (!v) throw ConfigParseError(fmt::format("missing key '{}'", key));
    return *v;
  }

  void expect_consumed() const {
    if (values_.empty()) return;
    std::string keys;
    for (const auto& [k, _] : values_) keys += (keys.empty() ? "" : ", ") + k;
    throw ConfigParseError(fmt::format("unknown or inapplicable keys: {}", keys));
  }

 private:
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string& key, std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ConfigParseError(fmt::format("key '{}': '{}' is not a number", key, s));
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, std::string_view s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigParseError(fmt::format("key '{}': '{}' is not a non-negative integer", key, s));
  }
  return v;
}

bool parse_bool(const std::string& key, std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigParseError(fmt::format("key '{}': expected true or false, got '{}'", key, s));
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) break;
    s = s.substr(b);
    const auto e = s.find_first_of(" \t");
    out.push_back(s.substr(0, e));
    if (e == std::string_view::npos) break;
    s = s.substr(e);
  }
  return out;
}

LosProbabilityLaw parse_law(const std::string& key, std::string_view s) {
  const auto parts = split_ws(s);
  LosProbabilityLaw law;
  if (parts.size() == 2 && parts[0] == "constant") {
    law.kind = LosProbabilityLaw::Kind::kConstant;
    law.coeff = parse_double(key, parts[1]);
    return law;
  }
  if (parts.size() == 3 && (parts[0] == "one_minus_exp_inverse" || parts[0] == "exp")) {
    law.kind = parts[0] == "exp" ? LosProbabilityLaw::Kind::kExp : LosProbabilityLaw::Kind::kOneMinusExpInverse;
    law.coeff = parse_double(key, parts[1]);
    law.scale_km = parse_double(key, parts[2]);
    return law;
  }
  throw ConfigParseError(fmt::format(
      "key '{}': expected 'constant P', 'one_minus_exp_inverse C R' or 'exp C R', got '{}'", key, s));
}

}  // namespace

std::string emit_config(const ScenarioConfig& c) {
  std::string out(kHeader);
  out += '\n';
  auto put = [&](std::string_view k, const std::string& v) { out += fmt::format("{} = {}\n", k, v); };
  put("name", c.name);
  put("bs_density_per_km2", num(c.bs_density_per_km2));
  put("ue_density_per_km2", c.ue_density.is_infinite() ? "inf" : num(c.ue_density.per_km2()));
  put("antenna_height_diff_km", num(c.antenna_height_diff_km));
  put("sinr_threshold", num(c.sinr_threshold));
  put("noise_power_dbm", num(c.noise_power_dbm));
  put("fading", c.fading.model == FadingModel::kRayleigh ? "rayleigh" : "rician_distance_k");
  put("rician_on_nlos", c.fading.rician_on_nlos ? "true" : "false");
  put("shadowing", c.shadowing ? "on" : "off");
  if (c.shadowing) {
    put("shadowing_sigma_db", num(c.shadowing->sigma_db));
    put("shadowing_corr_tau", num(c.shadowing->corr_tau));
  }
  put("shadowing_in_association", c.shadowing_in_association ? "true" : "false");
  if (const auto* p = std::get_if<ConstantPower>(&c.power)) {
    put("power_mode", "constant");
    put("tx_power_dbm", num(p->dbm));
  } else {
    put("power_mode", "density_dependent");
    put("edge_snr_db", num(std::get<DensityDependentPower>(c.power).edge_snr_db));
  }
  put("count_mode", c.count_mode == CountMode::kPoisson ? "poisson" : "deterministic");
  put("region_target_active_bs", num(c.region_target_active_bs));
  put("min_region_radius_km", num(c.min_region_radius_km));
  put("all_active_ratio", num(c.all_active_ratio));
  put("association_candidates", num(std::uint64_t{c.association_candidates}));
  put("trials", num(c.trials));
  put("master_seed", num(c.master_seed));
  if (c.path_loss == PathLossModel::three_gpp()) {
    put("path_loss", "3gpp");
  } else {
    put("path_loss", "custom");
    std::string bps;
    for (double d : c.path_loss.breakpoints_km()) bps += (bps.empty() ? "" : ", ") + num(d);
    put("path_loss.breakpoints_km", bps);
    const auto& pieces = c.path_loss.pieces();
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::string pre = fmt::format("path_loss.piece{}.", i + 1);
      put(pre + "los_gain", num(pieces[i].los_gain));
      put(pre + "los_exponent", num(pieces[i].los_exponent));
      put(pre + "nlos_gain", num(pieces[i].nlos_gain));
      put(pre + "nlos_exponent", num(pieces[i].nlos_exponent));
      put(pre + "los_probability", law_text(pieces[i].los_probability));
    }
  }
  return out;
}

ScenarioConfig parse_config(std::string_view text) {
  KeyValues kv(text);
  ScenarioConfig c;
  auto opt_double = [&](const std::string& key, double& dst) {
    if (auto v = kv.take(key)) dst = parse_double(key, *v);
  };

  if (auto v = kv.take("name")) c.name = *v;
  opt_double("bs_density_per_km2", c.bs_density_per_km2);
  if (auto v = kv.take("ue_density_per_km2")) {
    c.ue_density = *v == "inf" ? UeDensity::infinite()
                               : UeDensity::finite(parse_double("ue_density_per_km2", *v));
  }
  opt_double("antenna_height_diff_km", c.antenna_height_diff_km);
  opt_double("sinr_threshold", c.sinr_threshold);
  opt_double("noise_power_dbm", c.noise_power_dbm);
  if (auto v = kv.take("fading")) {
    if (*v == "rayleigh") c.fading.model = FadingModel::kRayleigh;
    else if (*v == "rician_distance_k") c.fading.model = FadingModel::kRicianDistanceK;
    else throw ConfigParseError(fmt::format("key 'fading': expected rayleigh or rician_distance_k, got '{}'", *v));
  }
  if (auto v = kv.take("rician_on_nlos")) c.fading.rician_on_nlos = parse_bool("rician_on_nlos", *v);

  const std::string shadowing = kv.take("shadowing").value_or("off");
  if (shadowing == "on") {
    Shadowing s;
    opt_double("shadowing_sigma_db", s.sigma_db);
    opt_double("shadowing_corr_tau", s.corr_tau);
    c.shadowing = s;
  } else if (shadowing != "off") {
    throw ConfigParseError(fmt::format("key 'shadowing': expected on or off, got '{}'", shadowing));
  }
  if (auto v = kv.take("shadowing_in_association")) {
    c.shadowing_in_association = parse_bool("shadowing_in_association", *v);
  }

  const std::string power = kv.take("power_mode").value_or("constant");
  if (power == "constant") {
    ConstantPower p;
    opt_double("tx_power_dbm", p.dbm);
    c.power = p;
  } else if (power == "density_dependent") {
    DensityDependentPower p;
    opt_double("edge_snr_db", p.edge_snr_db);
    c.power = p;
  } else {
    throw ConfigParseError(fmt::format("key 'power_mode': expected constant or density_dependent, got '{}'", power));
  }

  if (auto v = kv.take("count_mode")) {
    if (*v == "poisson") c.count_mode = CountMode::kPoisson;
    else if (*v == "deterministic") c.count_mode = CountMode::kDeterministic;
    else throw ConfigParseError(fmt::format("key 'count_mode': expected poisson or deterministic, got '{}'", *v));
  }
  opt_double("region_target_active_bs", c.region_target_active_bs);
  opt_double("min_region_radius_km", c.min_region_radius_km);
  opt_double("all_active_ratio", c.all_active_ratio);
  if (auto v = kv.take("association_candidates")) {
    const auto n = parse_uint("association_candidates", *v);
    if (n > std::numeric_limits<std::uint32_t>::max()) throw ConfigParseError("association_candidates too large");
    c.association_candidates = static_cast<std::uint32_t>(n);
  }
  if (auto v = kv.take("trials")) c.trials = parse_uint("trials", *v);
  if (auto v = kv.take("master_seed")) c.master_seed = parse_uint("master_seed", *v);

  const std::string model = kv.take("path_loss").value_or("3gpp");
  if (model == "custom") {
    std::vector<double> bps;
    const std::string list = kv.require("path_loss.breakpoints_km");
    std::string_view rest = list;
    while (!trim(rest).empty()) {
      const auto comma = rest.find(',');
      bps.push_back(parse_double("path_loss.breakpoints_km", trim(rest.substr(0, comma))));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    std::vector<PathLossPiece> pieces(bps.size() + 1);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::string pre = fmt::format("path_loss.piece{}.", i + 1);
      pieces[i].los_gain = parse_double(pre + "los_gain", kv.require(pre + "los_gain"));
      pieces[i].los_exponent = parse_double(pre + "los_exponent", kv.require(pre + "los_exponent"));
      pieces[i].nlos_gain = parse_double(pre + "nlos_gain", kv.require(pre + "nlos_gain"));
      pieces[i].nlos_exponent = parse_double(pre + "nlos_exponent", kv.require(pre + "nlos_exponent"));
      pieces[i].los_probability = parse_law(pre + "los_probability", kv.require(pre + "los_probability"));
    }
    try {
      c.path_loss = PathLossModel(std::move(bps), std::move(pieces));
    } catch (const ChannelModelError& e) {
      throw ConfigParseError(fmt::format("path_loss: {}", e.what()));
    }
  } else if (model != "3gpp") {
    throw ConfigParseError(fmt::format("key 'path_loss': expected 3gpp or custom, got '{}'", model));
  }

  kv.expect_consumed();
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigParseError& e) {
    throw ConfigParseError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace udn
