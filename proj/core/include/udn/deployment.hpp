#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "udn/config.hpp"
#include "udn/random.hpp"

namespace udn {

struct Point2D {
  double x = 0.0;  // km
  double y = 0.0;  // km

  double norm() const { return std::hypot(x, y); }
  friend bool operator==(const Point2D&, const Point2D&) = default;
};

inline double distance(const Point2D& a, const Point2D& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Disc of the given radius centred at the origin.
struct Region {
  double radius_km = 1.0;
  double area_km2() const;
};

/// One trial's point patterns. The typical UE sits at the origin and is not
/// part of ue_positions.
struct Deployment {
  std::vector<Point2D> bs_positions;
  std::vector<Point2D> ue_positions;
  Point2D typical_ue{0.0, 0.0};
  /// Set when UEs were not dropped: infinite UE density, or UE density high
  /// enough relative to BS density that every BS is active.
  bool all_bs_active = false;
};

/// Expected density of BSs serving at least one UE,
/// lambda * (1 - (1 + rho / (q lambda))^-q) with q = 3.5; lambda when rho is
/// infinite.
double estimate_active_density(double lambda, const UeDensity& rho);

/// Disc expected to hold region_target_active_bs active BSs, widened to
/// min_region_radius_km if that is larger.
Region region_for(const ValidatedConfig& cfg);

/// True if UE dropping is skipped and all BSs are treated as active.
bool uses_all_active_shortcut(const ScenarioConfig& cfg);

Deployment sample_deployment(const ValidatedConfig& cfg, const Region& region, RandomStream& rng);

/// Uniform grid over the region's bounding square with BS indices bucketed
/// per cell, for nearest-first candidate search.
class BsGrid {
 public:
  BsGrid(const std::vector<Point2D>& bs, const Region& region);

  int cells_per_side() const { return n_; }
  double cell_size_km() const { return h_; }

  struct Cell {
    int i;
    int j;
  };
  Cell cell_of(const Point2D& p) const;

  /// Lower bound on the 2D distance from p (in cell c) to any point in a
  /// cell at Chebyshev ring k around c.
  double ring_min_distance(const Point2D& p, Cell c, int k) const;

  /// True once ring k lies entirely outside the grid.
  bool ring_outside(Cell c, int k) const;

  /// Calls f(bs_index) for every BS in ring k around c.
  template <class F>
  void for_each_in_ring(Cell c, int k, F&& f) const {
    auto visit = [&](int i, int j) {
      if (i < 0 || j < 0 || i >= n_ || j >= n_) return;
      const std::size_t cell = static_cast<std::size_t>(j) * n_ + i;
      for (std::uint32_t s = start_[cell]; s < start_[cell + 1]; ++s) f(index_[s]);
    };
    if (k == 0) {
      visit(c.i, c.j);
      return;
    }
    for (int i = c.i - k; i <= c.i + k; ++i) {
      visit(i, c.j - k);
      visit(i, c.j + k);
    }
    for (int j = c.j - k + 1; j <= c.j + k - 1; ++j) {
      visit(c.i - k, j);
      visit(c.i + k, j);
    }
  }

 private:
  double origin_;
  double h_;
  int n_;
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> index_;
};

/// Debug dump: header `entity,x_km,y_km`, rows tagged bs, ue or typical_ue.
void write_deployment_csv(std::ostream& out, const Deployment& dep);

}  // namespace udn
