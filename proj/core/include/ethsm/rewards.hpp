#pragma once

#include "ethsm/markov.hpp"
#include "ethsm/model.hpp"

namespace ethsm {

/// Expected rewards attached to the block created by one transition, split
/// by component and recipient. "Expected" because the block's fate (regular,
/// uncle or stale) may still depend on future events; the probabilities are
/// resolved analytically at creation time.
struct RewardAttribution {
  double static_pool = 0.0;
  double static_honest = 0.0;
  double uncle_pool = 0.0;
  double uncle_honest = 0.0;
  double nephew_pool = 0.0;   // expected nephew reward paid out for
  double nephew_honest = 0.0; // referencing this block, by recipient

  /// Probability the block ends up as a referenced uncle. Zero when the
  /// reference distance exceeds the schedule's window (the block simply
  /// goes stale in that case).
  double uncle_probability = 0.0;
  int uncle_distance = 0;

  double total() const {
    return static_pool + static_honest + uncle_pool + uncle_honest +
           nephew_pool + nephew_honest;
  }
};

RewardAttribution attribute_transition(const TransitionRate& transition,
                                       const MiningConfig& config,
                                       const RewardSchedule& schedule);

/// Long-run reward rates per unit time. The six primary fields come from
/// weighting every transition's attribution by its stationary frequency;
/// the cf_* fields evaluate the closed-form series for the same quantities.
/// The two derivations agree on the block and uncle components; the series
/// for the nephew components omit the j = 0 fork-resolution terms, so their
/// disagreement is reported rather than enforced.
struct RevenueBreakdown {
  double block_pool = 0.0;
  double block_honest = 0.0;
  double uncle_pool = 0.0;
  double uncle_honest = 0.0;
  double nephew_pool = 0.0;
  double nephew_honest = 0.0;

  double cf_block_pool = 0.0;
  double cf_block_honest = 0.0;
  double cf_uncle_pool = 0.0;
  double cf_uncle_honest = 0.0;
  double cf_nephew_pool = 0.0;
  double cf_nephew_honest = 0.0;

  /// Rate at which referenced uncle blocks are created (reference distance
  /// inside the schedule's window).
  double uncle_rate = 0.0;

  double static_mismatch = 0.0;  // worst block/uncle disagreement
  double nephew_mismatch = 0.0;  // informational, see above

  double pool_total() const { return block_pool + uncle_pool + nephew_pool; }
  double honest_total() const {
    return block_honest + uncle_honest + nephew_honest;
  }
  double total() const { return pool_total() + honest_total(); }
};

RevenueBreakdown aggregate_revenue(const StationaryDistribution& dist,
                                   const MiningConfig& config,
                                   const RewardSchedule& schedule);

}  // namespace ethsm
