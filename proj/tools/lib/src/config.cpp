#include "schro_tools/config.hpp"

#include <cmath>

namespace schro::tools {

using nlohmann::json;

void config_error(const std::string& msg) { fail(ErrorCode::Config, msg); }

ConfigReader::ConfigReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
  if (j_.is_null()) j_ = json::object();
  if (!j_.is_object()) config_error(where_ + " must be a JSON object");
}

bool ConfigReader::has(const std::string& key) const { return j_.contains(key); }

const json* ConfigReader::lookup(const std::string& key) {
  used_.insert(key);
  const auto it = j_.find(key);
  return it == j_.end() ? nullptr : &*it;
}

double ConfigReader::number(const std::string& key, double fallback) {
  const json* v = lookup(key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) config_error(where_ + "." + key + " must be a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) config_error(where_ + "." + key + " must be finite");
  return x;
}

long ConfigReader::integer(const std::string& key, long fallback) {
  const json* v = lookup(key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) config_error(where_ + "." + key + " must be an integer");
  return v->get<long>();
}

bool ConfigReader::boolean(const std::string& key, bool fallback) {
  const json* v = lookup(key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) config_error(where_ + "." + key + " must be true or false");
  return v->get<bool>();
}

std::string ConfigReader::string(const std::string& key, const std::string& fallback) {
  const json* v = lookup(key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) config_error(where_ + "." + key + " must be a string");
  return v->get<std::string>();
}

json ConfigReader::object(const std::string& key) {
  const json* v = lookup(key);
  if (v == nullptr) return json::object();
  if (!v->is_object()) config_error(where_ + "." + key + " must be an object");
  return *v;
}

json ConfigReader::array(const std::string& key, json fallback) {
  const json* v = lookup(key);
  if (v == nullptr) return fallback;
  if (!v->is_array()) config_error(where_ + "." + key + " must be an array");
  return *v;
}

void ConfigReader::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!used_.count(key)) config_error("unknown key '" + key + "' in " + where_);
  }
}

EvolutionConfig evolution_from_json(const json& j, const std::string& where) {
  ConfigReader r(j, where);
  EvolutionConfig cfg;
  const std::string method = r.string("method", "taylor");
  if (method == "taylor") {
    cfg.method = EvolutionMethod::Taylor;
  } else if (method == "dense") {
    cfg.method = EvolutionMethod::DenseOracle;
  } else {
    config_error(where + ".method must be 'taylor' or 'dense'");
  }
  cfg.taylor_order = static_cast<int>(r.integer("taylor_order", cfg.taylor_order));
  cfg.split_threshold = r.number("split_threshold", cfg.split_threshold);
  r.finish();
  cfg.validate();
  return cfg;
}

json to_json(const EvolutionConfig& cfg) {
  return {{"method", cfg.method == EvolutionMethod::Taylor ? "taylor" : "dense"},
          {"taylor_order", cfg.taylor_order},
          {"split_threshold", cfg.split_threshold}};
}

}  // namespace schro::tools
