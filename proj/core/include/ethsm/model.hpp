#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ethsm {

/// Hash-power split between the selfish pool (alpha) and honest miners
/// (beta = 1 - alpha), plus the tie-breaking parameter gamma: the fraction
/// of honest hash power that mines on the pool's branch when two public
/// branches of equal length are visible.
struct MiningConfig {
  double alpha = 0.3;
  double gamma = 0.5;

  double beta() const { return 1.0 - alpha; }

  /// The stationary analysis requires alpha < 1/2 (positive recurrence).
  bool analytic_ok() const { return alpha > 0.0 && alpha < 0.5; }
};

enum class UncleMode { Ethereum, Fixed };

/// Block reward schedule. The static reward is normalized to 1; uncle and
/// nephew rewards are fractions of it, as functions of the reference
/// distance (height difference between nephew and uncle). Both vanish
/// beyond max_reference_distance.
class RewardSchedule {
 public:
  /// Ethereum mainnet rules: K_u(d) = (8-d)/8 for d = 1..6, K_n = 1/32.
  static RewardSchedule ethereum(int max_reference_distance = 6,
                                 double nephew_value = 1.0 / 32.0);

  /// Flat uncle reward for every distance up to the cutoff.
  static RewardSchedule fixed(double uncle_value, int max_reference_distance = 6,
                              double nephew_value = 1.0 / 32.0);

  /// No uncle or nephew rewards at all (the Bitcoin baseline).
  static RewardSchedule bitcoin();

  double static_reward() const { return 1.0; }
  double uncle_reward(int distance) const;
  double nephew_reward(int distance) const;

  UncleMode mode() const { return mode_; }
  double fixed_uncle_value() const { return fixed_uncle_value_; }
  double nephew_value() const { return nephew_value_; }
  int max_reference_distance() const { return max_reference_distance_; }

  /// Short identifier used in CSV output, e.g. "ethereum" or "fixed_0.5".
  std::string tag() const;

 private:
  RewardSchedule(UncleMode mode, double fixed_value, double nephew_value,
                 int max_reference_distance);

  UncleMode mode_;
  double fixed_uncle_value_;
  double nephew_value_;
  int max_reference_distance_;
};

/// Markov state: length of the pool's private branch (l_s) and of the
/// equal-length public branches (l_h).
struct ChainState {
  int l_s = 0;
  int l_h = 0;

  /// Reachable states are (0,0), (1,0), (1,1) and (i,j) with i - j >= 2.
  bool reachable() const;
  int lead() const { return l_s - l_h; }

  friend bool operator==(const ChainState&, const ChainState&) = default;
  friend auto operator<=>(const ChainState&, const ChainState&) = default;
};

/// Ethereum's distance-dependent uncle reward: (8-d)/8 for 1 <= d <= 6,
/// zero beyond.
double ethereum_uncle_reward(int distance);

/// Flat uncle reward: `value` for 1 <= d <= max_distance, zero beyond.
double fixed_uncle_reward(double value, int distance, int max_distance = 6);

/// Checks all type invariants; returns an empty list when the pair is valid,
/// otherwise one message per violation.
std::vector<std::string> validate_config(const MiningConfig& config,
                                         const RewardSchedule& schedule);

}  // namespace ethsm
