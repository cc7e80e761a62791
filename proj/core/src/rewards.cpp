#include "ethsm/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace ethsm {

RewardAttribution attribute_transition(const TransitionRate& transition,
                                       const MiningConfig& config,
                                       const RewardSchedule& schedule) {
  const double a = config.alpha;
  const double b = config.beta();
  const double g = config.gamma;
  const ChainState& s = transition.from;
  RewardAttribution out;

  switch (transition.event_kind) {
    case EventKind::PoolBlock:
      if (s == ChainState{0, 0}) {
        // The private block survives unless the pool loses the ensuing
        // fork to an honest block off its branch; then it is referenced
        // as an uncle at distance 1 and the referencing block is honest.
        double p_unc = b * b * (1.0 - g);
        out.static_pool = (1.0 - p_unc) * schedule.static_reward();
        out.uncle_pool = p_unc * schedule.uncle_reward(1);
        out.nephew_honest = p_unc * schedule.nephew_reward(1);
        out.uncle_probability = p_unc;
        out.uncle_distance = 1;
      } else {
        // With a lead of two the whole private branch is guaranteed to
        // become the main chain; ties at (1,1) are also won by whoever
        // mines, and that block stays on the winning chain either way.
        out.static_pool = schedule.static_reward();
      }
      break;

    case EventKind::HonestBlock:
      if (s == ChainState{0, 0} || s == ChainState{1, 1}) {
        out.static_honest = schedule.static_reward();
      } else {
        // (1,0) -> (1,1): the pool publishes and a height-1 fork forms.
        // The honest block survives only if the next honest block builds
        // on it; otherwise it is referenced at distance 1, by the pool
        // (pool wins the fork) or by an honest miner on the pool branch.
        double p_unc = a + b * g;
        out.static_honest = b * (1.0 - g) * schedule.static_reward();
        out.uncle_honest = p_unc * schedule.uncle_reward(1);
        out.nephew_pool = a * schedule.nephew_reward(1);
        out.nephew_honest = b * g * schedule.nephew_reward(1);
        out.uncle_probability = p_unc;
        out.uncle_distance = 1;
      }
      break;

    case EventKind::HonestBlockOnPrefix: {
      // The honest block lands on a prefix of the private branch and is
      // guaranteed to be orphaned, then referenced at distance lead(s).
      // The nephew goes to an honest miner only if honest miners push the
      // fork all the way down and then win the race from (0,0).
      int d = s.lead();
      double q_honest = std::pow(b, d - 1) * (1.0 + a * b * (1.0 - g));
      out.uncle_honest = schedule.uncle_reward(d);
      out.nephew_honest = q_honest * schedule.nephew_reward(d);
      out.nephew_pool = (1.0 - q_honest) * schedule.nephew_reward(d);
      out.uncle_probability = d <= schedule.max_reference_distance() ? 1.0 : 0.0;
      out.uncle_distance = d;
      break;
    }

    case EventKind::HonestBlockOffPrefix:
      // The block extends a losing public branch; its parent never joins
      // the main chain, so it cannot even be referenced. No rewards.
      break;
  }

  // An uncle beyond the reference window is just a stale block.
  if (out.uncle_distance > schedule.max_reference_distance())
    out.uncle_probability = 0.0;
  return out;
}

RevenueBreakdown aggregate_revenue(const StationaryDistribution& dist,
                                   const MiningConfig& config,
                                   const RewardSchedule& schedule) {
  const double a = config.alpha;
  const double b = config.beta();
  const double g = config.gamma;

  RevenueBreakdown out;
  double retained = 0.0;  // probability mass inside the truncation bound
  for (const ChainState& s : dist.states()) {
    double p = dist.pi(s);
    if (p == 0.0) continue;
    retained += p;
    for (const TransitionRate& t : transition_rates(s, config)) {
      RewardAttribution attr = attribute_transition(t, config, schedule);
      double w = p * t.rate;
      out.block_pool += w * attr.static_pool;
      out.block_honest += w * attr.static_honest;
      out.uncle_pool += w * attr.uncle_pool;
      out.uncle_honest += w * attr.uncle_honest;
      out.nephew_pool += w * attr.nephew_pool;
      out.nephew_honest += w * attr.nephew_honest;
      out.uncle_rate += w * attr.uncle_probability;
    }
  }

  // Closed-form series for the same six rates.
  const double pi00 = dist.pi(0, 0);
  const double pi10 = dist.pi(1, 0);
  const double pi11 = dist.pi(1, 1);
  // "a * 1" in the series stands for the pool's mining rate summed over
  // every state; evaluate it over the retained mass so both derivations
  // see the same truncated distribution.
  out.cf_block_pool = a * retained - a * b * b * (1.0 - g) * pi00;
  out.cf_block_honest = b * (pi00 + pi11) + b * b * (1.0 - g) * pi10;
  out.cf_uncle_pool = a * b * b * (1.0 - g) * schedule.uncle_reward(1) * pi00;
  out.cf_uncle_honest = (a * b + b * b * g) * schedule.uncle_reward(1) * pi10;
  out.cf_nephew_pool = a * b * schedule.nephew_reward(1) * pi10;
  out.cf_nephew_honest =
      a * b * b * (1.0 - g) * schedule.nephew_reward(1) * pi00 +
      b * b * g * schedule.nephew_reward(1) * pi10;
  for (int i = 2; i <= dist.truncation_bound(); ++i) {
    out.cf_uncle_honest += b * schedule.uncle_reward(i) * dist.pi(i, 0);
    // Terms over states with lead i and a standing fork (j >= 1).
    double mass = 0.0;
    for (int j = 1; i + j <= dist.truncation_bound(); ++j)
      mass += dist.pi(i + j, j);
    out.cf_uncle_honest += b * g * schedule.uncle_reward(i) * mass;
    out.cf_nephew_pool += std::pow(b, i - 1) * g *
                          (a - a * b * b * (1.0 - g)) *
                          schedule.nephew_reward(i) * mass;
    out.cf_nephew_honest += std::pow(b, i) * g *
                            (1.0 + a * b * (1.0 - g)) *
                            schedule.nephew_reward(i) * mass;
  }

  out.static_mismatch = std::max(
      {std::abs(out.block_pool - out.cf_block_pool),
       std::abs(out.block_honest - out.cf_block_honest),
       std::abs(out.uncle_pool - out.cf_uncle_pool),
       std::abs(out.uncle_honest - out.cf_uncle_honest)});
  out.nephew_mismatch =
      std::max(std::abs(out.nephew_pool - out.cf_nephew_pool),
               std::abs(out.nephew_honest - out.cf_nephew_honest));
  return out;
}

}  // namespace ethsm
