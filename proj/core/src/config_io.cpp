#include "ethsm/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ethsm {

RewardSchedule ToolConfig::schedule() const {
  if (uncle_reward_mode == UncleMode::Ethereum)
    return RewardSchedule::ethereum(max_reference_distance, nephew_value);
  return RewardSchedule::fixed(fixed_uncle_value, max_reference_distance,
                               nephew_value);
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& value, const std::string& line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size())
    throw std::runtime_error("bad numeric value in config line: " + line);
  return v;
}

}  // namespace

ToolConfig parse_config(std::istream& in) {
  ToolConfig config;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("expected key = value in config line: " + line);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key == "alpha") {
      config.mining.alpha = parse_double(value, line);
    } else if (key == "gamma") {
      config.mining.gamma = parse_double(value, line);
    } else if (key == "uncle_reward_mode") {
      if (value == "ethereum")
        config.uncle_reward_mode = UncleMode::Ethereum;
      else if (value == "fixed")
        config.uncle_reward_mode = UncleMode::Fixed;
      else
        throw std::runtime_error("uncle_reward_mode must be ethereum or "
                                 "fixed, got: " + value);
    } else if (key == "fixed_uncle_value") {
      config.fixed_uncle_value = parse_double(value, line);
    } else if (key == "nephew_value") {
      config.nephew_value = parse_double(value, line);
    } else if (key == "max_reference_distance") {
      config.max_reference_distance =
          static_cast<int>(parse_double(value, line));
    } else {
      throw std::runtime_error("unknown config key: " + key);
    }
  }
  return config;
}

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

std::string format_config(const ToolConfig& config) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "alpha = %.17g\n", config.mining.alpha);
  out += buf;
  std::snprintf(buf, sizeof buf, "gamma = %.17g\n", config.mining.gamma);
  out += buf;
  out += "uncle_reward_mode = ";
  out += config.uncle_reward_mode == UncleMode::Ethereum ? "ethereum" : "fixed";
  out += "\n";
  std::snprintf(buf, sizeof buf, "fixed_uncle_value = %.17g\n",
                config.fixed_uncle_value);
  out += buf;
  std::snprintf(buf, sizeof buf, "nephew_value = %.17g\n",
                config.nephew_value);
  out += buf;
  std::snprintf(buf, sizeof buf, "max_reference_distance = %d\n",
                config.max_reference_distance);
  out += buf;
  return out;
}

void save_config(const ToolConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << format_config(config);
}

}  // namespace ethsm
