#include "udn/deployment.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>

namespace udn {

namespace {

constexpr double kActiveDensityShape = 3.5;

Point2D uniform_in_disc(double radius, RandomStream& rng) {
  while (true) {
    const double x = 2.0 * uniform01(rng) - 1.0;
    const double y = 2.0 * uniform01(rng) - 1.0;
    if (x * x + y * y < 1.0) return {x * radius, y * radius};
  }
}

std::uint64_t draw_count(double mean, CountMode mode, RandomStream& rng) {
  if (mode == CountMode::kDeterministic) return static_cast<std::uint64_t>(std::llround(mean));
  return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

std::vector<Point2D> drop_points(std::uint64_t n, double radius, RandomStream& rng) {
  std::vector<Point2D> pts(n);
  for (auto& p : pts) p = uniform_in_disc(radius, rng);
  return pts;
}

}  // namespace

double Region::area_km2() const { return std::numbers::pi * radius_km * radius_km; }

double estimate_active_density(double lambda, const UeDensity& rho) {
  if (rho.is_infinite()) return lambda;
  const double q = kActiveDensityShape;
  return lambda * (1.0 - std::pow(1.0 + rho.per_km2() / (q * lambda), -q));
}

Region region_for(const ValidatedConfig& cfg) {
  const double active = estimate_active_density(cfg->bs_density_per_km2, cfg->ue_density);
  const double r = std::sqrt(cfg->region_target_active_bs / (std::numbers::pi * active));
  return Region{std::max(r, cfg->min_region_radius_km)};
}

bool uses_all_active_shortcut(const ScenarioConfig& cfg) {
  return cfg.ue_density.is_infinite() ||
         cfg.ue_density.per_km2() / cfg.bs_density_per_km2 >= cfg.all_active_ratio;
}

Deployment sample_deployment(const ValidatedConfig& cfg, const Region& region, RandomStream& rng) {
  Deployment dep;
  const double area = region.area_km2();
  dep.bs_positions = drop_points(draw_count(cfg->bs_density_per_km2 * area, cfg->count_mode, rng),
                                 region.radius_km, rng);
  dep.all_bs_active = uses_all_active_shortcut(cfg.get());
  if (!dep.all_bs_active) {
    dep.ue_positions = drop_points(draw_count(cfg->ue_density.per_km2() * area, cfg->count_mode, rng),
                                   region.radius_km, rng);
  }
  return dep;
}

// ---------------------------------------------------------------------------

BsGrid::BsGrid(const std::vector<Point2D>& bs, const Region& region) {
  constexpr double kPointsPerCell = 2.0;
  constexpr int kMaxSide = 2048;
  origin_ = -region.radius_km;
  const double side = 2.0 * region.radius_km;
  const double want = std::ceil(std::sqrt(static_cast<double>(bs.size()) / kPointsPerCell));
  n_ = static_cast<int>(std::clamp(want, 1.0, static_cast<double>(kMaxSide)));
  h_ = side / n_;

  const std::size_t cells = static_cast<std::size_t>(n_) * n_;
  std::vector<std::uint32_t> cell_of_point(bs.size());
  start_.assign(cells + 1, 0);
  for (std::size_t k = 0; k < bs.size(); ++k) {
    const Cell c = cell_of(bs[k]);
    cell_of_point[k] = static_cast<std::uint32_t>(c.j) * n_ + c.i;
    ++start_[cell_of_point[k] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) start_[c + 1] += start_[c];
  index_.resize(bs.size());
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t k = 0; k < bs.size(); ++k) index_[fill[cell_of_point[k]]++] = static_cast<std::uint32_t>(k);
}

BsGrid::Cell BsGrid::cell_of(const Point2D& p) const {
  auto clampi = [&](double v) {
    return std::clamp(static_cast<int>(std::floor((v - origin_) / h_)), 0, n_ - 1);
  };
  return {clampi(p.x), clampi(p.y)};
}

double BsGrid::ring_min_distance(const Point2D& p, Cell c, int k) const {
  if (k == 0) return 0.0;
  const double fx = p.x - (origin_ + c.i * h_);
  const double fy = p.y - (origin_ + c.j * h_);
  const double margin = std::max(0.0, std::min({fx, h_ - fx, fy, h_ - fy}));
  return (k - 1) * h_ + margin;
}

bool BsGrid::ring_outside(Cell c, int k) const {
  return c.i - k < 0 && c.j - k < 0 && c.i + k >= n_ && c.j + k >= n_;
}

void write_deployment_csv(std::ostream& out, const Deployment& dep) {
  out << "entity,x_km,y_km\n";
  out.precision(17);
  for (const auto& p : dep.bs_positions) out << "bs," << p.x << ',' << p.y << '\n';
  for (const auto& p : dep.ue_positions) out << "ue," << p.x << ',' << p.y << '\n';
  out << "typical_ue," << dep.typical_ue.x << ',' << dep.typical_ue.y << '\n';
}

}  // namespace udn
