#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "udn/association.hpp"
#include "udn/config.hpp"
#include "udn/deployment.hpp"

namespace udn {

struct SinrSample {
  double signal_mw = 0.0;
  double interference_mw = 0.0;
  double noise_mw = 0.0;
  double sinr = 0.0;
};

/// SINR of the typical UE: signal from its serving BS over the sum of every
/// other active BS's received power plus noise. All active BSs transmit at
/// tx_power_mw (full buffer).
SinrSample sinr_of_typical(const Deployment& dep, const AssociationResult& assoc, const LinkField& links,
                           double tx_power_mw, double noise_mw);

struct TrialOutcome {
  SinrSample sinr;
  std::uint64_t n_bs = 0;
  std::uint64_t n_active = 0;
  std::uint64_t n_ue = 0;
};

/// One scenario at one BS density, with its window, transmit power and noise
/// resolved once. Trials are pure functions of (master_seed, trial_index).
class CoverageSimulator {
 public:
  explicit CoverageSimulator(ValidatedConfig cfg);

  const ValidatedConfig& config() const { return cfg_; }
  const Region& region() const { return region_; }
  double tx_power_mw() const { return tx_power_mw_; }
  double noise_mw() const { return noise_mw_; }

  Deployment deployment(std::uint64_t trial_index) const;
  TrialOutcome run_trial(std::uint64_t trial_index) const;

  /// Outcomes of trials [first, first + count), in index order.
  std::vector<TrialOutcome> run_trials(std::uint64_t first, std::uint64_t count, unsigned workers = 0) const;

 private:
  ValidatedConfig cfg_;
  Region region_;
  double tx_power_mw_;
  double noise_mw_;
};

struct CoverageEstimate {
  double p_hat = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double ci95_halfwidth = 0.0;
  double lambda = 0.0;
  std::string config_id;
  double active_fraction = 0.0;
};

/// Normal-approximation 95% half-width 1.96 sqrt(p(1-p)/n).
double ci95_halfwidth(double p_hat, std::uint64_t trials);

/// Exact two-sided 95% Clopper-Pearson interval.
std::pair<double, double> clopper_pearson_95(std::uint64_t successes, std::uint64_t trials);

struct EstimateOptions {
  std::uint64_t trials = 0;  // 0: use the config's trial count
  unsigned workers = 0;      // 0: resolve_workers()
  bool clopper_pearson = false;
};

/// Coverage estimate from trial outcomes against threshold gamma.
CoverageEstimate summarize(std::span<const TrialOutcome> outcomes, double gamma, double lambda,
                           std::string config_id, bool clopper_pearson = false);

/// Fraction of trials with SINR > gamma. Deterministic for a given master
/// seed regardless of worker count.
CoverageEstimate estimate_coverage(const ValidatedConfig& cfg, double lambda, const EstimateOptions& opts = {});

/// Interference-limited coverage of a Rayleigh-faded, nearest-BS HPPP
/// network with a single path-loss exponent of 4:
/// 1 / (1 + sqrt(g) (pi/2 - atan(1/sqrt(g)))). Throws std::domain_error for
/// any other exponent.
double oracle_coverage_single_slope(double gamma, double alpha = 4.0);

}  // namespace udn
