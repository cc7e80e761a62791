#include "ethsm/model.hpp"

#include <cmath>
#include <sstream>

namespace ethsm {

double ethereum_uncle_reward(int distance) {
  if (distance >= 1 && distance <= 6) return (8.0 - distance) / 8.0;
  return 0.0;
}

double fixed_uncle_reward(double value, int distance, int max_distance) {
  if (distance >= 1 && distance <= max_distance) return value;
  return 0.0;
}

RewardSchedule::RewardSchedule(UncleMode mode, double fixed_value,
                               double nephew_value, int max_reference_distance)
    : mode_(mode),
      fixed_uncle_value_(fixed_value),
      nephew_value_(nephew_value),
      max_reference_distance_(max_reference_distance) {
  if (max_reference_distance < 1)
    throw std::invalid_argument("max_reference_distance must be >= 1");
  if (fixed_value < 0.0 || fixed_value > 1.0)
    throw std::invalid_argument("uncle reward must lie in [0, 1]");
  if (nephew_value < 0.0 || nephew_value > 1.0)
    throw std::invalid_argument("nephew reward must lie in [0, 1]");
}

RewardSchedule RewardSchedule::ethereum(int max_reference_distance,
                                        double nephew_value) {
  return RewardSchedule(UncleMode::Ethereum, 0.0, nephew_value,
                        max_reference_distance);
}

RewardSchedule RewardSchedule::fixed(double uncle_value,
                                     int max_reference_distance,
                                     double nephew_value) {
  return RewardSchedule(UncleMode::Fixed, uncle_value, nephew_value,
                        max_reference_distance);
}

RewardSchedule RewardSchedule::bitcoin() {
  return RewardSchedule(UncleMode::Fixed, 0.0, 0.0, 6);
}

double RewardSchedule::uncle_reward(int distance) const {
  if (distance < 1 || distance > max_reference_distance_) return 0.0;
  if (mode_ == UncleMode::Ethereum) return ethereum_uncle_reward(distance);
  return fixed_uncle_value_;
}

double RewardSchedule::nephew_reward(int distance) const {
  if (distance < 1 || distance > max_reference_distance_) return 0.0;
  return nephew_value_;
}

std::string RewardSchedule::tag() const {
  if (mode_ == UncleMode::Ethereum) return "ethereum";
  if (fixed_uncle_value_ == 0.0 && nephew_value_ == 0.0) return "bitcoin";
  std::ostringstream os;
  os << "fixed_" << fixed_uncle_value_;
  return os.str();
}

bool ChainState::reachable() const {
  if (l_s < 0 || l_h < 0) return false;
  if (l_s == 0) return l_h == 0;
  if (l_s == 1) return l_h == 0 || l_h == 1;
  return l_s - l_h >= 2;
}

std::vector<std::string> validate_config(const MiningConfig& config,
                                         const RewardSchedule& schedule) {
  std::vector<std::string> errors;
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    errors.push_back("alpha out of range (0, 1)");
  if (!(config.gamma >= 0.0 && config.gamma <= 1.0))
    errors.push_back("gamma out of range [0, 1]");
  if (!std::isfinite(config.alpha) || !std::isfinite(config.gamma))
    errors.push_back("non-finite parameter");
  for (int d = 1; d <= schedule.max_reference_distance(); ++d) {
    double ku = schedule.uncle_reward(d);
    double kn = schedule.nephew_reward(d);
    if (ku < 0.0 || kn < 0.0) {
      errors.push_back("negative reward at distance " + std::to_string(d));
      break;
    }
    if (ku > schedule.static_reward() || kn > schedule.static_reward()) {
      errors.push_back("reward exceeds static reward at distance " +
                       std::to_string(d));
      break;
    }
  }
  return errors;
}

}  // namespace ethsm
