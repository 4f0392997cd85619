#pragma once

#include <map>
#include <optional>
#include <string>

#include "frontierlab/frontier.hpp"

namespace frontierlab {

// Invalid or inconsistent configuration; `field()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Flat `key = value` text with dotted key sections and '#' comments.
using KeyValueMap = std::map<std::string, std::string>;

KeyValueMap parse_key_values(std::string_view text);

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0 = all cores
  std::string out_dir = ".";
  std::string market_name;

  MarketModel market;
  StrategySpec strategy;
  ObjectiveSpec objective;
  SweepSpec sweep;
  TrainConfig train;
};

RunConfig parse_run_config(const KeyValueMap& kv);
RunConfig load_run_config(const std::string& path);

}  // namespace frontierlab
