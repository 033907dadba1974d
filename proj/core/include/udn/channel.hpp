#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "udn/random.hpp"
#include "udn/units.hpp"

namespace udn {

// All distances are in km unless a name says otherwise.

class ChannelModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// LoS probability law for one distance piece. Every kind is non-increasing
/// in w for admissible parameters; values are clamped to [0, 1].
struct LosProbabilityLaw {
  enum class Kind {
    kConstant,          // p = coeff
    kOneMinusExpInverse,  // p = 1 - coeff * exp(-scale_km / w)
    kExp,               // p = coeff * exp(-w / scale_km)
  };

  Kind kind = Kind::kConstant;
  double coeff = 0.0;
  double scale_km = 1.0;

  double operator()(double w) const;

  friend bool operator==(const LosProbabilityLaw&, const LosProbabilityLaw&) = default;
};

/// Attenuation constants and LoS law for one piece of the piecewise model.
/// Gains are linear attenuation at 1 km.
struct PathLossPiece {
  double los_gain = 1.0;
  double los_exponent = 2.0;
  double nlos_gain = 1.0;
  double nlos_exponent = 2.0;
  LosProbabilityLaw los_probability;

  friend bool operator==(const PathLossPiece&, const PathLossPiece&) = default;
};

/// Piecewise LoS/NLoS power-law path loss. Piece n covers
/// (d_{n-1}, d_n] with d_0 = 0 and d_N = infinity.
class PathLossModel {
 public:
  /// LoS probabilities below this are treated as zero when bounding the
  /// gain of unexamined far-away links during candidate search.
  static constexpr double kLosHorizonEpsilon = 1e-12;

  /// Throws ChannelModelError on malformed input.
  PathLossModel(std::vector<double> breakpoints_km, std::vector<PathLossPiece> pieces);

  /// Two-slope 3GPP small-cell model: A^L = 10^-10.38, alpha^L = 2.09,
  /// A^NL = 10^-14.54, alpha^NL = 3.75, LoS probability
  /// 1 - 5 exp(-R1/w) up to d1 = R1/ln 10, 5 exp(-w/R2) beyond,
  /// with R1 = 0.156 km and R2 = 0.030 km.
  static PathLossModel three_gpp();

  /// Single power law with no LoS component.
  static PathLossModel single_slope(double gain, double exponent);

  const std::vector<double>& breakpoints_km() const { return breakpoints_; }
  const std::vector<PathLossPiece>& pieces() const { return pieces_; }

  /// Index of the piece containing w; upper breakpoints are inclusive.
  std::size_t piece_index(double w) const;

  double los_probability(double w) const;

  /// Linear gain, clamped to at most 1.
  double gain(double w, bool is_los) const;

  /// Upper bound on gain(w', s) over all w' >= w_min and states s that have
  /// LoS probability above kLosHorizonEpsilon.
  double gain_upper_bound(double w_min) const;

  /// Largest distance at which some piece has LoS probability above
  /// kLosHorizonEpsilon (0 if none, infinity if unbounded).
  double los_horizon_km() const { return los_horizon_; }

  friend bool operator==(const PathLossModel& a, const PathLossModel& b) {
    return a.breakpoints_ == b.breakpoints_ && a.pieces_ == b.pieces_;
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<PathLossPiece> pieces_;
  double los_horizon_ = 0.0;
};

/// One BS-to-UE link in a trial.
struct LinkRealization {
  double w = 0.0;           // 3D distance, km
  bool is_los = false;
  double path_loss = 0.0;   // linear gain <= 1
  double shadow_db = 0.0;
  double fading_gain = 1.0; // 1 for long-term-only realizations
};

enum class FadingModel { kRayleigh, kRicianDistanceK };

struct FadingSpec {
  FadingModel model = FadingModel::kRayleigh;
  bool rician_on_nlos = false;
  friend bool operator==(const FadingSpec&, const FadingSpec&) = default;
};

struct ConstantPower {
  double dbm = 24.0;
  friend bool operator==(const ConstantPower&, const ConstantPower&) = default;
};

/// Power chosen so a cell-edge NLoS UE of the mean-area cell sees this SNR.
struct DensityDependentPower {
  double edge_snr_db = 15.0;
  friend bool operator==(const DensityDependentPower&, const DensityDependentPower&) = default;
};

using PowerMode = std::variant<ConstantPower, DensityDependentPower>;

inline double dist3d(double r, double height_diff) { return std::hypot(r, height_diff); }

inline double los_probability(const PathLossModel& model, double w) {
  return model.los_probability(w);
}

inline double path_loss(const PathLossModel& model, double w, bool is_los) {
  return model.gain(w, is_los);
}

template <class URBG>
bool sample_los(const PathLossModel& model, double w, URBG& rng) {
  return uniform01(rng) < model.los_probability(w);
}

/// Combines a shared and a per-link standard normal into a shadowing value
/// with standard deviation sigma_db and pairwise correlation tau.
inline double correlated_shadow_db(double z_shared, double z_link, double tau, double sigma_db) {
  return sigma_db * (std::sqrt(tau) * z_shared + std::sqrt(1.0 - tau) * z_link);
}

/// Shadowing values (dB) for n_links links into one receiver.
template <class URBG>
std::vector<double> sample_shadowing_field(double tau, double sigma_db, std::size_t n_links,
                                           URBG& rng) {
  std::normal_distribution<double> normal;
  const double shared = normal(rng);
  std::vector<double> out(n_links);
  for (auto& s : out) s = correlated_shadow_db(shared, normal(rng), tau, sigma_db);
  return out;
}

/// Rician K-factor in dB for a 3D distance in meters.
inline double rician_k_factor_db(double w_meters) { return 13.0 - 0.03 * w_meters; }

/// Power gain |sqrt(K/(K+1)) + sqrt(1/(K+1)) c|^2 with c ~ CN(0, 1).
/// k_linear = +inf yields exactly 1.
template <class URBG>
double sample_rician_gain(double k_linear, URBG& rng) {
  if (std::isinf(k_linear)) return 1.0;
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const double los = std::sqrt(k_linear / (k_linear + 1.0));
  const double scatter = std::sqrt(1.0 / (k_linear + 1.0));
  const double re = los + scatter * normal(rng);
  const double im = scatter * normal(rng);
  return re * re + im * im;
}

template <class URBG>
double sample_rayleigh_gain(URBG& rng) {
  return std::exponential_distribution<double>(1.0)(rng);
}

template <class URBG>
double sample_fading(const FadingSpec& spec, bool is_los, double w, URBG& rng) {
  const bool rician = spec.model == FadingModel::kRicianDistanceK && (is_los || spec.rician_on_nlos);
  if (!rician) return sample_rayleigh_gain(rng);
  const double k = db_to_linear(rician_k_factor_db(w * kMetersPerKm));
  return sample_rician_gain(k, rng);
}

/// Transmit power in mW at BS density lambda (BSs/km^2).
double tx_power_mw(const PowerMode& mode, double lambda, const PathLossModel& model,
                   double noise_dbm);

inline double tx_power_dbm(const PowerMode& mode, double lambda, const PathLossModel& model,
                           double noise_dbm) {
  return mw_to_dbm(tx_power_mw(mode, lambda, model, noise_dbm));
}

}  // namespace udn
