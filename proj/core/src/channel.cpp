#include "udn/channel.hpp"

#include <algorithm>
#include <numbers>

#include <fmt/format.h>

namespace udn {

double LosProbabilityLaw::operator()(double w) const {
  double p = 0.0;
  switch (kind) {
    case Kind::kConstant:
      p = coeff;
      break;
    case Kind::kOneMinusExpInverse:
      p = 1.0 - coeff * std::exp(-scale_km / w);
      break;
    case Kind::kExp:
      p = coeff * std::exp(-w / scale_km);
      break;
  }
  return std::clamp(p, 0.0, 1.0);
}

namespace {

void check_law(const LosProbabilityLaw& law, std::size_t piece) {
  using Kind = LosProbabilityLaw::Kind;
  if (!std::isfinite(law.coeff) || law.coeff < 0.0) {
    throw ChannelModelError(fmt::format("piece {}: LoS probability coefficient must be >= 0", piece + 1));
  }
  if (law.kind == Kind::kConstant && law.coeff > 1.0) {
    throw ChannelModelError(fmt::format("piece {}: constant LoS probability must be in [0,1]", piece + 1));
  }
  if (law.kind != Kind::kConstant && !(law.scale_km > 0.0 && std::isfinite(law.scale_km))) {
    throw ChannelModelError(fmt::format("piece {}: LoS probability scale must be > 0", piece + 1));
  }
}

// Largest w in (lo, hi] with law(w) > eps, or lo if none. The law is
// non-increasing so bisection applies.
double piece_horizon(const LosProbabilityLaw& law, double lo, double hi, double eps) {
  constexpr double kFar = 1e7;
  const double top = std::isinf(hi) ? kFar : hi;
  if (law(top) > eps) return hi;
  double a = lo;
  double b = top;
  if (law(std::max(a, 1e-15)) <= eps) return lo;
  for (int i = 0; i < 200 && b - a > 1e-12 * b; ++i) {
    const double mid = 0.5 * (a + b);
    if (law(mid) > eps) a = mid; else b = mid;
  }
  return b;
}

double power_law(double gain, double exponent, double w) {
  return std::min(1.0, gain * std::pow(w, -exponent));
}

}  // namespace

PathLossModel::PathLossModel(std::vector<double> breakpoints_km, std::vector<PathLossPiece> pieces)
    : breakpoints_(std::move(breakpoints_km)), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ChannelModelError("path loss model needs at least one piece");
  if (pieces_.size() != breakpoints_.size() + 1) {
    throw ChannelModelError(fmt::format("path loss model has {} pieces but {} breakpoints (expected {})",
                                        pieces_.size(), breakpoints_.size(), pieces_.size() - 1));
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double d = breakpoints_[i];
    if (!(d > 0.0) || !std::isfinite(d) || (i > 0 && !(d > breakpoints_[i - 1]))) {
      throw ChannelModelError("breakpoints must be finite, positive and strictly increasing");
    }
  }
  for (std::size_t n = 0; n < pieces_.size(); ++n) {
    const auto& p = pieces_[n];
    for (double g : {p.los_gain, p.nlos_gain}) {
      if (!(g > 0.0) || !std::isfinite(g)) throw ChannelModelError(fmt::format("piece {}: gains must be > 0", n + 1));
    }
    for (double a : {p.los_exponent, p.nlos_exponent}) {
      if (!(a > 0.0) || !std::isfinite(a)) throw ChannelModelError(fmt::format("piece {}: exponents must be > 0", n + 1));
    }
    check_law(p.los_probability, n);
  }

  for (std::size_t n = 0; n < pieces_.size(); ++n) {
    const double lo = n == 0 ? 0.0 : breakpoints_[n - 1];
    const double hi = n + 1 == pieces_.size() ? std::numeric_limits<double>::infinity() : breakpoints_[n];
    const double h = piece_horizon(pieces_[n].los_probability, lo, hi, kLosHorizonEpsilon);
    if (h > lo) los_horizon_ = std::max(los_horizon_, h);
  }
}

PathLossModel PathLossModel::three_gpp() {
  constexpr double kR1 = 0.156;
  constexpr double kR2 = 0.030;
  const double d1 = kR1 / std::numbers::ln10;
  PathLossPiece near{std::pow(10.0, -10.38), 2.09, std::pow(10.0, -14.54), 3.75,
                     {LosProbabilityLaw::Kind::kOneMinusExpInverse, 5.0, kR1}};
  PathLossPiece far = near;
  far.los_probability = {LosProbabilityLaw::Kind::kExp, 5.0, kR2};
  return PathLossModel({d1}, {near, far});
}

PathLossModel PathLossModel::single_slope(double gain, double exponent) {
  PathLossPiece p{gain, exponent, gain, exponent, {LosProbabilityLaw::Kind::kConstant, 0.0, 1.0}};
  return PathLossModel({}, {p});
}

std::size_t PathLossModel::piece_index(double w) const {
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), w);
  return static_cast<std::size_t>(it - breakpoints_.begin());
}

double PathLossModel::los_probability(double w) const {
  return pieces_[piece_index(w)].los_probability(w);
}

double PathLossModel::gain(double w, bool is_los) const {
  const auto& p = pieces_[piece_index(w)];
  return is_los ? power_law(p.los_gain, p.los_exponent, w) : power_law(p.nlos_gain, p.nlos_exponent, w);
}

double PathLossModel::gain_upper_bound(double w_min) const {
  double bound = 0.0;
  for (std::size_t n = piece_index(w_min); n < pieces_.size(); ++n) {
    const double lo = n == 0 ? 0.0 : breakpoints_[n - 1];
    // sup over an open lower end equals the value at the endpoint
    const double w = std::max(w_min, lo);
    const auto& p = pieces_[n];
    bound = std::max(bound, power_law(p.nlos_gain, p.nlos_exponent, w));
    if (w < los_horizon_) bound = std::max(bound, power_law(p.los_gain, p.los_exponent, w));
  }
  return bound;
}

double tx_power_mw(const PowerMode& mode, double lambda, const PathLossModel& model, double noise_dbm) {
  if (const auto* c = std::get_if<ConstantPower>(&mode)) return dbm_to_mw(c->dbm);
  const auto& dd = std::get<DensityDependentPower>(mode);
  const double edge_km = std::sqrt(1.0 / (lambda * std::numbers::pi));
  const double worst_gain = model.gain(edge_km, /*is_los=*/false);
  return db_to_linear(dd.edge_snr_db) * dbm_to_mw(noise_dbm) / worst_gain;
}

}  // namespace udn
