#pragma once

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "schro/error.hpp"
#include "schro/propagate.hpp"

namespace schro::tools {

/// Typed access to one JSON object; every key must be consumed, so finish()
/// rejects typos and stale options.
class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& j, std::string where);

  double number(const std::string& key, double fallback);
  long integer(const std::string& key, long fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string string(const std::string& key, const std::string& fallback);
  /// Sub-object (empty object when absent).
  nlohmann::json object(const std::string& key);
  nlohmann::json array(const std::string& key, nlohmann::json fallback);
  bool has(const std::string& key) const;

  /// Throws Error(Config) naming the first unknown key.
  void finish() const;

 private:
  const nlohmann::json* lookup(const std::string& key);

  nlohmann::json j_;
  std::string where_;
  std::set<std::string> used_;
};

/// {"method": "taylor"|"dense", "taylor_order": R, "split_threshold": s}
EvolutionConfig evolution_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json to_json(const EvolutionConfig& cfg);

[[noreturn]] void config_error(const std::string& msg);

}  // namespace schro::tools
