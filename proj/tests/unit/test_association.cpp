#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "udn/association.hpp"
#include "udn/config.hpp"
#include "udn/deployment.hpp"
#include "udn/metrics.hpp"

namespace udn {
namespace {

ScenarioConfig single_slope_finite_ue() {
  ScenarioConfig c = preset("fig1_ns1_L0");
  c.path_loss = PathLossModel::single_slope(std::pow(10.0, -14.54), 4.0);
  return c;
}

// Brute force over every BS; ties to the lower index.
std::uint32_t brute_force_best(const LinkField& links, std::uint32_t ue, std::size_t n_bs, bool nearest_only,
                               const Deployment& dep) {
  auto value = [&](std::uint32_t b) {
    return nearest_only ? -distance(links.ue_position(ue), dep.bs_positions[b])
                        : links.association_metric(links.long_term(ue, b));
  };
  std::uint32_t best = 0;
  double best_v = value(0);
  for (std::uint32_t b = 1; b < n_bs; ++b) {
    const double v = value(b);
    if (v > best_v) {
      best_v = v;
      best = b;
    }
  }
  return best;
}

TEST(Associate, SingleBsServesEveryone) {
  const auto cfg = validate(preset("fig1_ns1_L0"));
  Deployment dep;
  dep.bs_positions = {{0.3, 0.1}};
  dep.ue_positions = {{0.0, 0.5}, {-0.2, -0.2}, {0.9, 0.0}};
  const LinkField links(cfg, dep, 1);
  const auto r = associate(dep, links, cfg);
  EXPECT_EQ(r.typical_serving_bs, 0u);
  EXPECT_EQ(r.serving, (std::vector<std::uint32_t>{0, 0, 0}));
  EXPECT_EQ(r.active_bs, (std::vector<std::uint32_t>{0}));
}

TEST(Associate, TieGoesToLowerIndex) {
  const auto cfg = validate(single_slope_finite_ue());
  Deployment dep;
  dep.bs_positions = {{0.5, 0.5}, {0.1, 0.0}, {-0.1, 0.0}, {0.0, 0.1}};
  dep.ue_positions = {{0.6, 0.0}, {0.5, 0.0}};
  const LinkField links(cfg, dep, 1);
  const auto r = associate(dep, links, cfg);
  EXPECT_EQ(r.typical_serving_bs, 1u);
  EXPECT_EQ(r.serving[0], 1u);
}

TEST(Associate, EmptyWindowThrows) {
  const auto cfg = validate(preset("fig1_ws1"));
  Deployment dep;
  const LinkField links(cfg, dep, 1);
  EXPECT_THROW(associate(dep, links, cfg), EmptyWindowError);
}

TEST(Associate, EqualsNearestNeighbourUnderSingleSlope) {
  for (double lambda : {300.0, 3000.0}) {
    ScenarioConfig c = single_slope_finite_ue();
    c.bs_density_per_km2 = lambda;
    c.region_target_active_bs = 200;
    const CoverageSimulator sim(validate(c));
    for (std::uint64_t t = 0; t < 5; ++t) {
      const auto dep = sim.deployment(t);
      const LinkField links(sim.config(), dep, trial_seed(1, t));
      const auto r = associate(dep, links, sim.config());
      const auto n = dep.bs_positions.size();
      EXPECT_EQ(r.typical_serving_bs, brute_force_best(links, LinkField::kTypicalUe, n, true, dep));
      for (std::uint32_t u = 0; u < dep.ue_positions.size(); ++u) {
        ASSERT_EQ(r.serving[u], brute_force_best(links, u, n, true, dep)) << "trial " << t << " ue " << u;
      }
    }
  }
}

TEST(Associate, EqualsBruteForceUnderLosNlosPathLoss) {
  for (const char* name : {"fig1_ns1_L0", "fig1_ns1_L85"}) {
    ScenarioConfig c = preset(name);
    c.bs_density_per_km2 = 2000.0;
    c.region_target_active_bs = 150;
    const CoverageSimulator sim(validate(c));
    for (std::uint64_t t = 0; t < 4; ++t) {
      const auto dep = sim.deployment(t);
      const LinkField links(sim.config(), dep, trial_seed(1, t));
      const auto r = associate(dep, links, sim.config());
      const auto n = dep.bs_positions.size();
      EXPECT_EQ(r.typical_serving_bs, brute_force_best(links, LinkField::kTypicalUe, n, false, dep));
      for (std::uint32_t u = 0; u < dep.ue_positions.size(); ++u) {
        ASSERT_EQ(r.serving[u], brute_force_best(links, u, n, false, dep)) << name << " trial " << t << " ue " << u;
      }
    }
  }
}

// Best shadowed metric among the k links of highest path-loss gain, found by
// sorting every link.
std::uint32_t brute_force_top_k(const LinkField& links, std::uint32_t ue, std::size_t n_bs, std::size_t k) {
  std::vector<std::pair<double, std::uint32_t>> all;
  for (std::uint32_t b = 0; b < n_bs; ++b) all.push_back({links.long_term(ue, b).path_loss, b});
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return x.first > y.first || (x.first == y.first && x.second < y.second);
  });
  all.resize(std::min(k, all.size()));
  std::uint32_t best = all.front().second;
  double best_v = -1.0;
  for (const auto& [g, b] : all) {
    const double v = links.association_metric(links.long_term(ue, b));
    if (v > best_v || (v == best_v && b < best)) {
      best_v = v;
      best = b;
    }
  }
  return best;
}

TEST(Associate, ShadowedAssociationUsesTopTenCandidates) {
  ScenarioConfig c = preset("fig1_ns1_L0");
  c.shadowing = Shadowing{10.0, 0.5};
  c.bs_density_per_km2 = 1000.0;
  c.region_target_active_bs = 150;
  const CoverageSimulator sim(validate(c));
  std::size_t total = 0, agree = 0;
  for (std::uint64_t t = 0; t < 4; ++t) {
    const auto dep = sim.deployment(t);
    const LinkField links(sim.config(), dep, trial_seed(1, t));
    const auto r = associate(dep, links, sim.config());
    const auto n = dep.bs_positions.size();
    EXPECT_EQ(r.typical_serving_bs, brute_force_best(links, LinkField::kTypicalUe, n, false, dep));
    for (std::uint32_t u = 0; u < dep.ue_positions.size(); ++u) {
      ASSERT_EQ(r.serving[u], brute_force_top_k(links, u, n, 10)) << "trial " << t << " ue " << u;
      ++total;
      agree += r.serving[u] == brute_force_best(links, u, n, false, dep);
    }
  }
  // The candidate cap is an approximation; most UEs still land on the
  // unrestricted argmax.
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(total), 0.9);
}

TEST(Associate, ActiveSetEqualsServedSet) {
  for (const char* name : {"fig1_ns1_L0", "fig1_ns1_L85", "fig3_ns1_L85"}) {
    ScenarioConfig c = preset(name);
    c.bs_density_per_km2 = 3000.0;
    c.region_target_active_bs = 200;
    const CoverageSimulator sim(validate(c));
    for (std::uint64_t t = 0; t < 5; ++t) {
      const auto dep = sim.deployment(t);
      const LinkField links(sim.config(), dep, trial_seed(1, t));
      const auto r = associate(dep, links, sim.config());
      std::set<std::uint32_t> served(r.serving.begin(), r.serving.end());
      served.insert(r.typical_serving_bs);
      EXPECT_EQ(std::vector<std::uint32_t>(served.begin(), served.end()), r.active_bs) << name;
    }
  }
}

TEST(Associate, AllActiveWhenUeDensityInfinite) {
  const CoverageSimulator sim(validate(preset("fig1_ws1")));
  const auto dep = sim.deployment(0);
  const LinkField links(sim.config(), dep, trial_seed(1, 0));
  const auto r = associate(dep, links, sim.config());
  EXPECT_EQ(r.active_bs.size(), dep.bs_positions.size());
  EXPECT_TRUE(r.serving.empty());
}

double active_fraction(double lambda, double rho, std::uint64_t trials) {
  ScenarioConfig c = preset("fig1_ns1_L0");
  c.bs_density_per_km2 = lambda;
  c.ue_density = UeDensity::finite(rho);
  const CoverageSimulator sim(validate(c));
  std::vector<ActivityCount> counts;
  for (const auto& o : sim.run_trials(0, trials, 1)) counts.push_back({o.n_active, o.n_bs});
  return measure_active_fraction(counts);
}

TEST(ActiveFraction, MatchesFormulaAt1e4And300) {
  const double formula = estimate_active_density(1e4, UeDensity::finite(300.0)) / 1e4;
  EXPECT_NEAR(formula, 0.0294304, 1e-6);
  EXPECT_NEAR(active_fraction(1e4, 300.0, 60), formula, 0.1 * formula);
}

TEST(ActiveFraction, IncreasesWithUeDensity) {
  const double a = active_fraction(1000.0, 100.0, 30);
  const double b = active_fraction(1000.0, 300.0, 30);
  const double c = active_fraction(1000.0, 1000.0, 30);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

TEST(ActiveFraction, Pooled) {
  const std::vector<ActivityCount> counts = {{1, 10}, {3, 10}, {0, 0}};
  EXPECT_DOUBLE_EQ(measure_active_fraction(counts), 0.2);
  EXPECT_DOUBLE_EQ(measure_active_fraction({}), 0.0);
}

TEST(LinkField, RealizationsAreStableAcrossCalls) {
  const auto cfg = validate(preset("fig3_ns1_L85"));
  Deployment dep;
  dep.bs_positions = {{0.01, 0.0}, {0.2, 0.1}};
  dep.ue_positions = {{0.05, 0.05}};
  const LinkField a(cfg, dep, 42);
  const LinkField b(cfg, dep, 42);
  for (std::uint32_t ue : {0u, LinkField::kTypicalUe}) {
    for (std::uint32_t bs : {0u, 1u}) {
      const auto x = a.full(ue, bs);
      const auto y = b.full(ue, bs);
      const auto lt = a.long_term(ue, bs);
      EXPECT_EQ(x.is_los, y.is_los);
      EXPECT_EQ(x.shadow_db, y.shadow_db);
      EXPECT_EQ(x.fading_gain, y.fading_gain);
      EXPECT_EQ(lt.path_loss, x.path_loss);
      EXPECT_EQ(lt.shadow_db, x.shadow_db);
      EXPECT_EQ(lt.fading_gain, 1.0);
    }
  }
}

}  // namespace
}  // namespace udn
