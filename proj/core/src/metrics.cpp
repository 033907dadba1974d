#include "udn/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

#include "udn/parallel.hpp"

namespace udn {

namespace {
constexpr std::uint64_t kDeploymentStreamTag = 0x4445504cULL;
}

SinrSample sinr_of_typical(const Deployment& /*dep*/, const AssociationResult& assoc, const LinkField& links,
                           double tx_power_mw, double noise_mw) {
  SinrSample s;
  s.noise_mw = noise_mw;
  auto received = [&](std::uint32_t bs) {
    const LinkRealization link = links.full(LinkField::kTypicalUe, bs);
    return tx_power_mw * link.path_loss * db_to_linear(link.shadow_db) * link.fading_gain;
  };
  for (std::uint32_t bs : assoc.active_bs) {
    if (bs == assoc.typical_serving_bs) {
      s.signal_mw = received(bs);
    } else {
      s.interference_mw += received(bs);
    }
  }
  s.sinr = s.signal_mw / (s.interference_mw + s.noise_mw);
  return s;
}

CoverageSimulator::CoverageSimulator(ValidatedConfig cfg)
    : cfg_(std::move(cfg)),
      region_(region_for(cfg_)),
      tx_power_mw_(udn::tx_power_mw(cfg_->power, cfg_->bs_density_per_km2, cfg_->path_loss, cfg_->noise_power_dbm)),
      noise_mw_(dbm_to_mw(cfg_->noise_power_dbm)) {}

Deployment CoverageSimulator::deployment(std::uint64_t trial_index) const {
  RandomStream rng(derive_seed(trial_seed(cfg_->master_seed, trial_index), kDeploymentStreamTag));
  return sample_deployment(cfg_, region_, rng);
}

TrialOutcome CoverageSimulator::run_trial(std::uint64_t trial_index) const {
  const Deployment dep = deployment(trial_index);
  const LinkField links(cfg_, dep, trial_seed(cfg_->master_seed, trial_index));
  const AssociationResult assoc = associate(dep, links, cfg_);
  TrialOutcome out;
  out.sinr = sinr_of_typical(dep, assoc, links, tx_power_mw_, noise_mw_);
  out.n_bs = dep.bs_positions.size();
  out.n_active = assoc.active_bs.size();
  out.n_ue = dep.ue_positions.size();
  return out;
}

std::vector<TrialOutcome> CoverageSimulator::run_trials(std::uint64_t first, std::uint64_t count,
                                                        unsigned workers) const {
  std::vector<TrialOutcome> out(count);
  parallel_for(count, resolve_workers(workers), [&](std::uint64_t i) { out[i] = run_trial(first + i); });
  return out;
}

double ci95_halfwidth(double p_hat, std::uint64_t trials) {
  return 1.96 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

std::pair<double, double> clopper_pearson_95(std::uint64_t successes, std::uint64_t trials) {
  using boost::math::beta_distribution;
  using boost::math::quantile;
  constexpr double kAlpha = 0.05;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  const double lo = successes == 0 ? 0.0 : quantile(beta_distribution<double>(k, n - k + 1.0), kAlpha / 2);
  const double hi = successes == trials ? 1.0 : quantile(beta_distribution<double>(k + 1.0, n - k), 1.0 - kAlpha / 2);
  return {lo, hi};
}

CoverageEstimate summarize(std::span<const TrialOutcome> outcomes, double gamma, double lambda,
                           std::string config_id, bool clopper_pearson) {
  CoverageEstimate e;
  e.lambda = lambda;
  e.config_id = std::move(config_id);
  e.trials = outcomes.size();
  std::vector<ActivityCount> counts;
  counts.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.sinr.sinr > gamma) ++e.successes;
    counts.push_back({o.n_active, o.n_bs});
  }
  if (e.trials == 0) return e;
  e.p_hat = static_cast<double>(e.successes) / static_cast<double>(e.trials);
  e.active_fraction = measure_active_fraction(counts);
  if (clopper_pearson) {
    const auto [lo, hi] = clopper_pearson_95(e.successes, e.trials);
    e.ci95_halfwidth = std::max(e.p_hat - lo, hi - e.p_hat);
  } else {
    e.ci95_halfwidth = ci95_halfwidth(e.p_hat, e.trials);
  }
  return e;
}

CoverageEstimate estimate_coverage(const ValidatedConfig& cfg, double lambda, const EstimateOptions& opts) {
  const CoverageSimulator sim(with_density(cfg, lambda));
  const std::uint64_t n = opts.trials > 0 ? opts.trials : cfg->trials;
  const auto outcomes = sim.run_trials(0, n, opts.workers);
  return summarize(outcomes, cfg->sinr_threshold, lambda, cfg->name, opts.clopper_pearson);
}

double oracle_coverage_single_slope(double gamma, double alpha) {
  if (alpha != 4.0) throw std::domain_error("closed-form coverage oracle requires a path loss exponent of 4");
  if (!(gamma > 0.0)) throw std::domain_error("SINR threshold must be > 0");
  const double s = std::sqrt(gamma);
  return 1.0 / (1.0 + s * (std::numbers::pi / 2.0 - std::atan(1.0 / s)));
}

}  // namespace udn
