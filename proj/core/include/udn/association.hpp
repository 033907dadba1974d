#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "udn/channel.hpp"
#include "udn/config.hpp"
#include "udn/deployment.hpp"

namespace udn {

/// Lazily evaluated link realizations of one trial. Every (UE, BS) link owns
/// a counter-based random stream keyed by the trial seed, so a link yields
/// the same LoS state, shadowing and fading no matter when or how often it
/// is evaluated. Association and SINR therefore see one consistent world.
class LinkField {
 public:
  static constexpr std::uint32_t kTypicalUe = std::numeric_limits<std::uint32_t>::max();

  LinkField(const ValidatedConfig& cfg, const Deployment& dep, std::uint64_t trial_seed);

  Point2D ue_position(std::uint32_t ue) const {
    return ue == kTypicalUe ? dep_->typical_ue : dep_->ue_positions[ue];
  }

  /// Distance, LoS state, path loss and shadowing; fading_gain is left at 1.
  LinkRealization long_term(std::uint32_t ue, std::uint32_t bs) const;

  /// long_term() plus the fast-fading power gain.
  LinkRealization full(std::uint32_t ue, std::uint32_t bs) const;

  /// Shared standard-normal shadowing component of a receiving UE.
  double shared_shadow_z(std::uint32_t ue) const;

  /// Long-term metric maximized by association: path loss times shadowing
  /// (linear) when shadowing takes part in association.
  double association_metric(const LinkRealization& link) const;

  bool shadowing_in_association() const { return shadow_assoc_; }

 private:
  LinkRealization draw(std::uint32_t ue, std::uint32_t bs, bool with_fading) const;

  const ScenarioConfig* cfg_;
  const Deployment* dep_;
  std::uint64_t link_seed_;
  bool shadow_assoc_;
  std::vector<double> shared_z_;  // per UE, typical UE last
};

struct AssociationResult {
  std::vector<std::uint32_t> serving;    // per entry of Deployment::ue_positions
  std::vector<std::uint32_t> active_bs;  // ascending
  std::uint32_t typical_serving_bs = 0;
};

class EmptyWindowError : public std::runtime_error {
 public:
  EmptyWindowError() : std::runtime_error("no BS in the simulation window; region is too small for this density") {}
};

/// Serves every UE from the BS maximizing LinkField::association_metric
/// (fast fading excluded, ties to the lower BS index) and marks BSs with at
/// least one UE active. Non-typical UEs with shadowing in association pick
/// among their association_candidates lowest-path-loss BSs; the typical UE
/// is always evaluated against every BS when that matters.
/// Throws EmptyWindowError when the deployment has no BS.
AssociationResult associate(const Deployment& dep, const LinkField& links, const ValidatedConfig& cfg);

struct ActivityCount {
  std::uint64_t active = 0;
  std::uint64_t total = 0;
};

inline ActivityCount activity_of(const AssociationResult& r, const Deployment& dep) {
  return {r.active_bs.size(), dep.bs_positions.size()};
}

/// Pooled empirical active fraction sum(active) / sum(total).
double measure_active_fraction(std::span<const ActivityCount> counts);

}  // namespace udn
