#pragma once

#include <iosfwd>
#include <string>

#include "ethsm/model.hpp"

namespace ethsm {

/// Everything a run needs, loadable from a key = value file.
struct ToolConfig {
  MiningConfig mining;
  UncleMode uncle_reward_mode = UncleMode::Ethereum;
  double fixed_uncle_value = 0.5;
  double nephew_value = 1.0 / 32.0;
  int max_reference_distance = 6;

  RewardSchedule schedule() const;
};

/// Parses a config file. Lines are `key = value`; blank lines and lines
/// starting with '#' are ignored. Unknown keys and malformed values throw
/// std::runtime_error with the offending line.
ToolConfig parse_config(std::istream& in);
ToolConfig load_config(const std::string& path);

/// Serialization that parse_config round-trips exactly.
std::string format_config(const ToolConfig& config);
void save_config(const ToolConfig& config, const std::string& path);

}  // namespace ethsm
