// Acceptance suite: one [PASS]/[FAIL] verdict line per criterion, with the
// measured numbers on indented lines underneath. UDN_ACCEPTANCE_SCALE
// multiplies every Monte Carlo trial count (default 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "udn/association.hpp"
#include "udn/channel.hpp"
#include "udn/config.hpp"
#include "udn/deployment.hpp"
#include "udn/metrics.hpp"
#include "udn/random.hpp"
#include "udn/sweep.hpp"

using namespace udn;

namespace {

double g_scale = 1.0;
int g_failed = 0;

std::uint64_t scaled(std::uint64_t trials) {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(static_cast<double>(trials) * g_scale)));
}

void detail(const std::string& line) { fmt::print("       {}\n", line); }

void verdict(int id, const std::string& title, bool pass, double seconds) {
  if (!pass) ++g_failed;
  fmt::print("[{}] criterion {:>2}: {} ({:.1f} s)\n", pass ? "PASS" : "FAIL", id, title, seconds);
  std::fflush(stdout);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

CoverageEstimate estimate(ScenarioConfig cfg, double lambda, std::uint64_t trials, std::uint64_t seed = 1) {
  cfg.master_seed = seed;
  return estimate_coverage(validate(std::move(cfg)), lambda, {scaled(trials), 0, false});
}

std::string fmt_p(const CoverageEstimate& e) { return fmt::format("{:.4f}+/-{:.4f}", e.p_hat, e.ci95_halfwidth); }

// ---- shared qualitative checks (criteria 3-5, reused by 6) ---------------

struct Check {
  bool pass = true;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
  }
};

const std::vector<double> kDipGrid = {1.0, 3.1622776601683795, 10.0, 31.622776601683793, 100.0,
                                      316.22776601683796, 1000.0, 3162.2776601683795, 10000.0};

Check dip_check(const ScenarioConfig& cfg, std::uint64_t trials) {
  Check c;
  std::map<double, CoverageEstimate> p;
  std::string curve;
  for (double l : kDipGrid) {
    p[l] = estimate(cfg, l, trials);
    curve += fmt::format(" {:g}:{:.3f}", l, p[l].p_hat);
  }
  c.notes.push_back("curve" + curve);
  const double drop = p[100.0].p_hat - p[1000.0].p_hat;
  c.require(drop > 0.05, fmt::format("p(1e2) - p(1e3) = {:.4f} > 0.05", drop));
  const auto peak = std::max_element(kDipGrid.begin(), kDipGrid.end(),
                                     [&](double a, double b) { return p[a].p_hat < p[b].p_hat; });
  c.require(*peak < 1000.0, fmt::format("peak at lambda = {:g} < 1e3", *peak));
  return c;
}

Check crash_check(const ScenarioConfig& cfg, std::uint64_t trials) {
  Check c;
  const auto a = estimate(cfg, 1e3, trials);
  const auto b = estimate(cfg, 1e4, trials);
  const auto d = estimate(cfg, 1e5, trials);
  c.notes.push_back(fmt::format("p(1e3)={} p(1e4)={} p(1e5)={} trials={}", fmt_p(a), fmt_p(b), fmt_p(d), a.trials));
  c.require(a.p_hat > b.p_hat, fmt::format("p(1e3) > p(1e4): {:.5f} > {:.5f}", a.p_hat, b.p_hat));
  c.require(b.p_hat > d.p_hat, fmt::format("p(1e4) > p(1e5): {:.5f} > {:.5f}", b.p_hat, d.p_hat));
  c.require(d.p_hat < 0.15, fmt::format("p(1e5) = {:.5f} < 0.15", d.p_hat));
  c.require(d.p_hat < a.p_hat / 2, fmt::format("p(1e5) < p(1e3)/2: {:.5f} < {:.5f}", d.p_hat, a.p_hat / 2));
  return c;
}

Check takeoff_check(const ScenarioConfig& cfg, std::uint64_t trials) {
  Check c;
  const auto a = estimate(cfg, 1e3, trials);
  const auto b = estimate(cfg, 1e4, trials);
  const auto d = estimate(cfg, 1e5, trials);
  c.notes.push_back(fmt::format("{}: p(1e3)={} p(1e4)={} p(1e5)={} trials={}", cfg.name, fmt_p(a), fmt_p(b), fmt_p(d),
                                a.trials));
  c.require(b.p_hat > a.p_hat, fmt::format("{} p(1e4) > p(1e3): {:.4f} > {:.4f}", cfg.name, b.p_hat, a.p_hat));
  c.require(d.p_hat > b.p_hat, fmt::format("{} p(1e5) > p(1e4): {:.4f} > {:.4f}", cfg.name, d.p_hat, b.p_hat));
  return c;
}

void report(const Check& c) {
  for (const auto& n : c.notes) detail(n);
}

// ---- criteria -------------------------------------------------------------

void criterion1() {
  Timer t;
  const auto e = estimate(preset("oracle_single_slope"), 100.0, 20000);
  const double oracle = oracle_coverage_single_slope(1.0);
  const double secs = t.seconds();
  detail(fmt::format("p_hat={} oracle={:.4f} |diff|={:.4f} (tol 0.015) trials={}", fmt_p(e), oracle,
                     std::abs(e.p_hat - oracle), e.trials));
  detail(fmt::format("runtime {:.1f} s (target < 60 s)", secs));
  verdict(1, "oracle calibration", std::abs(e.p_hat - oracle) < 0.015 && secs < 60.0, secs);
}

void criterion2() {
  Timer t;
  const ScenarioConfig cfg = preset("oracle_single_slope");
  bool pass = true;
  // Same seed: common random numbers make the estimates coincide; distinct
  // seeds: the estimates differ only by Monte Carlo noise.
  for (bool distinct : {false, true}) {
    std::vector<double> p;
    std::uint64_t seed = 1;
    for (double l : {10.0, 100.0, 1000.0}) p.push_back(estimate(cfg, l, 20000, distinct ? seed++ : 1).p_hat);
    double spread = 0.0;
    for (double a : p) {
      for (double b : p) spread = std::max(spread, std::abs(a - b));
    }
    pass = pass && spread < 0.02;
    detail(fmt::format("{} seeds: p(10)={:.4f} p(100)={:.4f} p(1000)={:.4f} max|diff|={:.4f} (tol 0.02)",
                       distinct ? "distinct" : "shared", p[0], p[1], p[2], spread));
  }
  verdict(2, "density invariance", pass, t.seconds());
}

constexpr std::uint64_t kDipTrials = 4000;
constexpr std::uint64_t kCrashTrials = 40000;
constexpr std::uint64_t kTakeoffTrials = 2000;
constexpr std::uint64_t kFactorTakeoffTrials = 600;

void criterion3() {
  Timer t;
  const Check c = dip_check(preset("fig1_ws1"), kDipTrials);
  report(c);
  verdict(3, "dip with LoS/NLoS path loss, L=0, all BSs active", c.pass, t.seconds());
}

void criterion4() {
  Timer t;
  const Check c = crash_check(preset("fig1_ws1_ws2"), kCrashTrials);
  report(c);
  verdict(4, "crash with L=8.5 m, all BSs active", c.pass, t.seconds());
}

void criterion5() {
  Timer t;
  const Check a = takeoff_check(preset("fig1_ns1_L0"), kTakeoffTrials);
  const Check b = takeoff_check(preset("fig1_ns1_L85"), kTakeoffTrials);
  report(a);
  report(b);
  verdict(5, "takeoff with rho=300 UEs/km^2, L=0 and L=8.5 m", a.pass && b.pass, t.seconds());
}

void criterion6() {
  Timer t;
  struct Variant {
    std::string name;
    std::function<void(ScenarioConfig&)> apply;
  };
  const std::vector<Variant> variants = {
      {"rician", [](ScenarioConfig& c) { c.fading.model = FadingModel::kRicianDistanceK; }},
      {"shadowing", [](ScenarioConfig& c) { c.shadowing = Shadowing{10.0, 0.5}; }},
      {"density_power", [](ScenarioConfig& c) { c.power = DensityDependentPower{15.0}; }},
      {"deterministic", [](ScenarioConfig& c) { c.count_mode = CountMode::kDeterministic; }},
      {"all_four",
       [](ScenarioConfig& c) {
         c.fading.model = FadingModel::kRicianDistanceK;
         c.shadowing = Shadowing{10.0, 0.5};
         c.power = DensityDependentPower{15.0};
         c.count_mode = CountMode::kDeterministic;
       }},
  };
  bool pass = true;
  for (const auto& v : variants) {
    auto with = [&](const char* name) {
      ScenarioConfig c = preset(name);
      v.apply(c);
      return c;
    };
    const Check dip = dip_check(with("fig1_ws1"), kDipTrials);
    const Check crash = crash_check(with("fig1_ws1_ws2"), kCrashTrials);
    const Check take0 = takeoff_check(with("fig1_ns1_L0"), kFactorTakeoffTrials);
    const Check take85 = takeoff_check(with("fig1_ns1_L85"), kFactorTakeoffTrials);
    const bool ok = dip.pass && crash.pass && take0.pass && take85.pass;
    pass = pass && ok;
    detail(fmt::format("-- {}: {}", v.name, ok ? "all inequalities preserved" : "some inequality flipped"));
    for (const Check* c : {&dip, &crash, &take0, &take85}) report(*c);
    std::fflush(stdout);
  }
  verdict(6, "minor factors preserve every inequality of criteria 3-5", pass, t.seconds());
}

void criterion7() {
  Timer t;
  ScenarioConfig constant = preset("fig1_ws1");
  ScenarioConfig dd = constant;
  dd.power = DensityDependentPower{15.0};
  const auto a = estimate(constant, 1e4, 20000);
  const auto b = estimate(dd, 1e4, 20000);
  const double combined = std::hypot(a.ci95_halfwidth, b.ci95_halfwidth);
  const double diff = std::abs(a.p_hat - b.p_hat);
  detail(fmt::format("constant 24 dBm: {}  density-dependent: {} (tx {:.2f} dBm)", fmt_p(a), fmt_p(b),
                     tx_power_dbm(dd.power, 1e4, dd.path_loss, dd.noise_power_dbm)));
  detail(fmt::format("|diff|={:.5f} < 2 x combined ci95 = {:.5f}", diff, 2 * combined));
  verdict(7, "transmit power cancels when interference-limited", diff < 2 * combined, t.seconds());
}

void criterion8() {
  Timer t;
  const PathLossModel model = PathLossModel::three_gpp();
  const PowerMode mode = DensityDependentPower{15.0};
  const double p50 = tx_power_dbm(mode, 50.0, model, -95.0);
  const double p3 = tx_power_dbm(mode, 3.0, model, -95.0);
  bool slope_ok = true;
  double worst = 0.0;
  for (double l = 0.1; l <= 1e6; l *= 10.0) {
    const double s = tx_power_dbm(mode, l * 10.0, model, -95.0) - tx_power_dbm(mode, l, model, -95.0);
    worst = std::max(worst, std::abs(s + 18.75));
    slope_ok = slope_ok && std::abs(s + 18.75) < 1e-9;
  }
  detail(fmt::format("P(50)={:.4f} dBm (24.2 +/- 0.1), P(3)={:.4f} dBm (47.1 +/- 0.1)", p50, p3));
  detail(fmt::format("slope -18.75 dB/decade over [0.1, 1e7], worst deviation {:.2e} dB", worst));
  verdict(8, "density-dependent transmit power",
          std::abs(p50 - 24.2) <= 0.1 && std::abs(p3 - 47.1) <= 0.1 && slope_ok, t.seconds());
}

void criterion9() {
  Timer t;
  bool pass = true;

  constexpr int kSamples = 1000000;
  SplitMix64 rng(20240611);
  auto mean_of = [&](auto&& draw) {
    double s = 0.0;
    for (int i = 0; i < kSamples; ++i) s += draw();
    return s / kSamples;
  };
  const double rayleigh = mean_of([&] { return sample_rayleigh_gain(rng); });
  pass = pass && std::abs(rayleigh - 1.0) < 0.01;
  std::string rician_line;
  for (double w_m : {5.0, 100.0, 400.0}) {
    const double k = db_to_linear(rician_k_factor_db(w_m));
    const double m = mean_of([&] { return sample_rician_gain(k, rng); });
    pass = pass && std::abs(m - 1.0) < 0.01;
    rician_line += fmt::format(" w={:g}m:{:.4f}", w_m, m);
  }
  detail(fmt::format("fading mean (tol 1%): rayleigh {:.4f}; rician{}", rayleigh, rician_line));

  // Shadowing as the simulator draws it: two BSs seen by the typical UE,
  // one fresh trial seed per sample.
  {
    ScenarioConfig cfg = preset("fig1_ws1");
    cfg.shadowing = Shadowing{10.0, 0.5};
    const ValidatedConfig vc = validate(cfg);
    Deployment dep;
    dep.bs_positions = {{0.05, 0.0}, {0.0, 0.08}};
    dep.all_bs_active = true;
    constexpr int n = 200000;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
      const LinkField links(vc, dep, trial_seed(99, static_cast<std::uint64_t>(i)));
      const double a = links.long_term(LinkField::kTypicalUe, 0).shadow_db;
      const double b = links.long_term(LinkField::kTypicalUe, 1).shadow_db;
      sa += a, sb += b, saa += a * a, sbb += b * b, sab += a * b;
    }
    const double ma = sa / n, mb = sb / n;
    const double va = saa / n - ma * ma, vb = sbb / n - mb * mb;
    const double corr = (sab / n - ma * mb) / std::sqrt(va * vb);
    const double sigma = std::sqrt(0.5 * (va + vb));
    pass = pass && std::abs(corr - 0.5) <= 0.01 && std::abs(sigma - 10.0) <= 0.1;
    detail(fmt::format("shadowing: corr={:.4f} (0.50 +/- 0.01) sigma={:.4f} dB (10 +/- 0.1)", corr, sigma));
  }

  {
    ScenarioConfig cfg = preset("fig1_ns1_L0");
    cfg.bs_density_per_km2 = 1e4;
    const CoverageSimulator sim(validate(cfg));
    const std::uint64_t n = scaled(200);
    std::vector<ActivityCount> counts;
    std::uint64_t violations = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const Deployment dep = sim.deployment(i);
      const LinkField links(sim.config(), dep, trial_seed(sim.config()->master_seed, i));
      const AssociationResult r = associate(dep, links, sim.config());
      std::set<std::uint32_t> served(r.serving.begin(), r.serving.end());
      served.insert(r.typical_serving_bs);
      const std::set<std::uint32_t> active(r.active_bs.begin(), r.active_bs.end());
      if (served != active) ++violations;
      counts.push_back(activity_of(r, dep));
    }
    const double measured = measure_active_fraction(counts);
    const double formula = estimate_active_density(1e4, UeDensity::finite(300.0)) / 1e4;
    const double rel = std::abs(measured - formula) / formula;
    pass = pass && rel < 0.10 && violations == 0;
    detail(fmt::format("active fraction at (1e4, 300): measured {:.5f}, formula {:.5f}, rel err {:.2f}% (tol 10%)",
                       measured, formula, 100 * rel));
    detail(fmt::format("active set == served set on {}/{} trials", n - violations, n));
  }
  verdict(9, "statistical invariants", pass, t.seconds());
}

void criterion10() {
  Timer t;
  const auto dir = std::filesystem::temp_directory_path() / fmt::format("udn_acceptance_{}", ::getpid());
  std::filesystem::create_directories(dir);
  auto run = [&](unsigned workers, const std::string& tag, OutputFormat format) {
    SweepSpec spec;
    spec.lambda_grid = {100.0, 1000.0, 1e4};
    spec.scenarios = {{"ws1", preset("fig1_ws1")}, {"ns1", preset("fig1_ns1_L85")}};
    spec.master_seed = 42;
    spec.trials = 300;
    spec.escalation.max_trials = 1200;
    spec.workers = workers;
    spec.format = format;
    spec.output_path = dir / (tag + (format == OutputFormat::kJson ? ".json" : ".csv"));
    run_sweep(spec);
    std::ifstream f(spec.output_path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  bool pass = true;
  for (auto format : {OutputFormat::kCsv, OutputFormat::kJson}) {
    const std::string w1 = run(1, "w1", format);
    const std::string w1b = run(1, "w1b", format);
    const std::string w4 = run(4, "w4", format);
    const bool same = !w1.empty() && w1 == w1b && w1 == w4;
    pass = pass && same;
    detail(fmt::format("{}: 1 worker x2 and 4 workers -> {} bytes, {}", format == OutputFormat::kJson ? "json" : "csv",
                       w1.size(), same ? "byte-identical" : "DIFFERENT"));
  }
  std::filesystem::remove_all(dir);
  verdict(10, "deterministic sweep output across reruns and worker counts", pass, t.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* s = std::getenv("UDN_ACCEPTANCE_SCALE")) g_scale = std::max(1e-3, std::atof(s));
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::function<void()>> all = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                   criterion6, criterion7, criterion8, criterion9, criterion10};
  fmt::print("acceptance suite (trial scale {:g})\n", g_scale);
  for (int id = 1; id <= static_cast<int>(all.size()); ++id) {
    if (only.empty() || only.count(id)) {
      try {
        all[id - 1]();
      } catch (const std::exception& e) {
        detail(fmt::format("exception: {}", e.what()));
        verdict(id, "aborted", false, 0.0);
      }
    }
  }
  fmt::print("{} criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
