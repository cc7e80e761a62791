#pragma once

#include "ethsm/rewards.hpp"

namespace ethsm {

/// How the protocol's difficulty adjustment perceives the chain, which
/// decides what the reward rates are normalized by.
enum class Scenario {
  /// Difficulty keyed to main-chain blocks only: rewards are divided by
  /// the main-chain growth rate.
  MainChainDifficulty,
  /// Difficulty also counts referenced uncles, so the divisor includes
  /// the uncle creation rate.
  UncleInclusiveDifficulty,
};

/// Rewards per difficulty-adjusted block for each side.
struct AbsoluteRevenue {
  double pool = 0.0;
  double honest = 0.0;
  double divisor = 0.0;  // rate the difficulty adjustment keys on
};

AbsoluteRevenue absolute_revenue(const RevenueBreakdown& revenue,
                                 Scenario scenario);

/// Pool's share of all rewards paid out.
double relative_share(const RevenueBreakdown& revenue);

enum class ThresholdStatus { Found, AlwaysProfitable, NeverProfitable };

struct ThresholdResult {
  ThresholdStatus status = ThresholdStatus::Found;
  double alpha = 0.0;  // meaningful only when status == Found
};

/// Smallest hash-power share alpha at which the withholding strategy earns
/// more than mining honestly (absolute revenue above alpha). Solved by a
/// coarse scan over (0, 1/2) followed by bisection.
ThresholdResult profitability_threshold(double gamma,
                                        const RewardSchedule& schedule,
                                        Scenario scenario,
                                        int truncation = 200,
                                        double tolerance = 1e-6);

/// Classic threshold without uncle rewards: (1 - gamma) / (3 - 2 gamma).
double bitcoin_baseline_threshold(double gamma);

/// Independently published closed form for the pool's share of static
/// rewards when only static rewards exist; used as a cross-check.
double eyal_sirer_relative_revenue(const MiningConfig& config);

}  // namespace ethsm
