#include "udn/association.hpp"

#include <algorithm>
#include <optional>
#include <random>

namespace udn {

namespace {

constexpr std::uint64_t kLinkStreamTag = 0x4c494e4bULL;
constexpr std::uint64_t kSharedShadowTag = 0x8000000000000000ULL;

struct Candidate {
  std::uint32_t bs;
  LinkRealization link;
};

bool ranks_above(double gain_a, std::uint32_t a, double gain_b, std::uint32_t b) {
  return gain_a > gain_b || (gain_a == gain_b && a < b);
}

// The `k` links of highest path-loss gain for `ue`, best first.
void best_by_path_loss(const BsGrid& grid, const LinkField& links, const ValidatedConfig& cfg,
                       std::uint32_t ue, std::size_t k, std::vector<Candidate>& out) {
  out.clear();
  const Point2D p = links.ue_position(ue);
  const auto cell = grid.cell_of(p);
  const double height = cfg->antenna_height_diff_km;
  for (int ring = 0; ring == 0 || !grid.ring_outside(cell, ring); ++ring) {
    if (out.size() == k) {
      const double w_min = dist3d(grid.ring_min_distance(p, cell, ring), height);
      if (cfg->path_loss.gain_upper_bound(w_min) < out.back().link.path_loss) break;
    }
    grid.for_each_in_ring(cell, ring, [&](std::uint32_t bs) {
      const LinkRealization link = links.long_term(ue, bs);
      if (out.size() == k && !ranks_above(link.path_loss, bs, out.back().link.path_loss, out.back().bs)) return;
      auto pos = std::find_if(out.begin(), out.end(), [&](const Candidate& c) {
        return ranks_above(link.path_loss, bs, c.link.path_loss, c.bs);
      });
      out.insert(pos, Candidate{bs, link});
      if (out.size() > k) out.pop_back();
    });
  }
}

std::uint32_t pick_by_metric(const LinkField& links, const std::vector<Candidate>& cands) {
  std::uint32_t best = cands.front().bs;
  double best_metric = -1.0;
  for (const auto& c : cands) {
    const double m = links.association_metric(c.link);
    if (ranks_above(m, c.bs, best_metric, best)) {
      best_metric = m;
      best = c.bs;
    }
  }
  return best;
}

}  // namespace

LinkField::LinkField(const ValidatedConfig& cfg, const Deployment& dep, std::uint64_t trial_seed)
    : cfg_(&cfg.get()),
      dep_(&dep),
      link_seed_(derive_seed(trial_seed, kLinkStreamTag)),
      shadow_assoc_(cfg->shadowing.has_value() && cfg->shadowing_in_association) {
  if (!cfg->shadowing) return;
  const auto n_ue = static_cast<std::uint32_t>(dep.ue_positions.size());
  shared_z_.resize(std::size_t{n_ue} + 1);
  auto draw_shared = [&](std::uint32_t ue) {
    SplitMix64 rng(derive_seed(link_seed_, ue, kSharedShadowTag));
    return std::normal_distribution<double>()(rng);
  };
  for (std::uint32_t u = 0; u < n_ue; ++u) shared_z_[u] = draw_shared(u);
  shared_z_[n_ue] = draw_shared(kTypicalUe);
}

double LinkField::shared_shadow_z(std::uint32_t ue) const {
  if (shared_z_.empty()) return 0.0;
  return ue == kTypicalUe ? shared_z_.back() : shared_z_[ue];
}

LinkRealization LinkField::draw(std::uint32_t ue, std::uint32_t bs, bool with_fading) const {
  SplitMix64 rng(derive_seed(link_seed_, ue, bs));
  LinkRealization link;
  const double r = distance(ue_position(ue), dep_->bs_positions[bs]);
  link.w = dist3d(r, cfg_->antenna_height_diff_km);
  link.is_los = sample_los(cfg_->path_loss, link.w, rng);
  link.path_loss = path_loss(cfg_->path_loss, link.w, link.is_los);
  if (cfg_->shadowing) {
    const double z = std::normal_distribution<double>()(rng);
    link.shadow_db = correlated_shadow_db(shared_shadow_z(ue), z, cfg_->shadowing->corr_tau,
                                          cfg_->shadowing->sigma_db);
  }
  if (with_fading) link.fading_gain = sample_fading(cfg_->fading, link.is_los, link.w, rng);
  return link;
}

LinkRealization LinkField::long_term(std::uint32_t ue, std::uint32_t bs) const { return draw(ue, bs, false); }

LinkRealization LinkField::full(std::uint32_t ue, std::uint32_t bs) const { return draw(ue, bs, true); }

double LinkField::association_metric(const LinkRealization& link) const {
  return shadow_assoc_ ? link.path_loss * db_to_linear(link.shadow_db) : link.path_loss;
}

AssociationResult associate(const Deployment& dep, const LinkField& links, const ValidatedConfig& cfg) {
  const auto n_bs = static_cast<std::uint32_t>(dep.bs_positions.size());
  if (n_bs == 0) throw EmptyWindowError();

  AssociationResult result;
  const bool need_grid = !dep.ue_positions.empty() || !(dep.all_bs_active || links.shadowing_in_association());
  std::optional<BsGrid> grid;
  if (need_grid) {
    Region bounds{0.0};
    for (const auto& p : dep.bs_positions) bounds.radius_km = std::max({bounds.radius_km, std::abs(p.x), std::abs(p.y)});
    for (const auto& p : dep.ue_positions) bounds.radius_km = std::max({bounds.radius_km, std::abs(p.x), std::abs(p.y)});
    bounds.radius_km = std::nextafter(std::max(bounds.radius_km, 1e-9), 1.0);
    grid.emplace(dep.bs_positions, bounds);
  }

  const std::size_t k = links.shadowing_in_association() ? cfg->association_candidates : 1;
  std::vector<Candidate> cands;
  cands.reserve(k + 1);

  if (dep.all_bs_active || links.shadowing_in_association()) {
    std::uint32_t best = 0;
    double best_metric = -1.0;
    for (std::uint32_t b = 0; b < n_bs; ++b) {
      const double m = links.association_metric(links.long_term(LinkField::kTypicalUe, b));
      if (m > best_metric) {
        best_metric = m;
        best = b;
      }
    }
    result.typical_serving_bs = best;
  } else {
    best_by_path_loss(*grid, links, cfg, LinkField::kTypicalUe, 1, cands);
    result.typical_serving_bs = cands.front().bs;
  }

  if (dep.all_bs_active) {
    result.active_bs.resize(n_bs);
    for (std::uint32_t b = 0; b < n_bs; ++b) result.active_bs[b] = b;
    return result;
  }

  std::vector<std::uint8_t> active(n_bs, 0);
  active[result.typical_serving_bs] = 1;
  result.serving.resize(dep.ue_positions.size());
  for (std::uint32_t u = 0; u < dep.ue_positions.size(); ++u) {
    best_by_path_loss(*grid, links, cfg, u, k, cands);
    result.serving[u] = k == 1 ? cands.front().bs : pick_by_metric(links, cands);
    active[result.serving[u]] = 1;
  }
  for (std::uint32_t b = 0; b < n_bs; ++b) {
    if (active[b]) result.active_bs.push_back(b);
  }
  return result;
}

double measure_active_fraction(std::span<const ActivityCount> counts) {
  std::uint64_t active = 0;
  std::uint64_t total = 0;
  for (const auto& c : counts) {
    active += c.active;
    total += c.total;
  }
  return total == 0 ? 0.0 : static_cast<double>(active) / static_cast<double>(total);
}

}  // namespace udn
