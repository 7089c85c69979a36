#include "schro/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "schro/error.hpp"

namespace schro {

using nlohmann::json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::Format, where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) fail(ErrorCode::Format, "unknown key '" + key + "' in " + where);
  }
  for (const auto* key : allowed) {
    if (!j.contains(key)) fail(ErrorCode::Format, "missing key '" + std::string(key) + "' in " + where);
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(ErrorCode::Format, where + " must be a number");
  return j.get<double>();
}

}  // namespace

json matrix_to_json(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    fail(ErrorCode::Format, "matrix must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  RMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail(ErrorCode::Format, "matrix rows must all have the same length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], "matrix entry");
  }
  return m;
}

json to_json(const RoutingReport& report) {
  return {{"measure", report.measure},
          {"target", report.target},
          {"initial_variance", report.initial_variance},
          {"final_mean", report.final_mean},
          {"final_variance", report.final_variance}};
}

json to_json(const PMOResult& result) {
  json trace = json::array();
  for (const auto& [iter, value] : result.objective_trace) trace.push_back(json::array({iter, value}));
  return {{"transform", matrix_to_json(result.transform)},
          {"objective_trace", std::move(trace)},
          {"initial_objective", result.initial_objective},
          {"final_objective", result.final_objective},
          {"final_deficiency", result.final_deficiency},
          {"restarted", result.restarted},
          {"warnings", result.warnings}};
}

json to_json(const ShiftReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"window_id", e.window_id},
                       {"coordinate", e.coordinate},
                       {"shift", e.shift ? json(*e.shift) : json(nullptr)},
                       {"pre_mean", e.pre_mean},
                       {"post_mean", e.post_mean},
                       {"pre_variance", e.pre_variance},
                       {"post_variance", e.post_variance},
                       {"input_energy", e.input_energy}});
  }
  return {{"entries", std::move(entries)},
          {"mean", report.mean ? json(*report.mean) : json(nullptr)},
          {"missing", report.missing}};
}

json to_json(const FilterParams& params) {
  json terms = json::array();
  for (const auto& term : params.terms) {
    json direction = json::array();
    for (Eigen::Index i = 0; i < term.direction.size(); ++i) direction.push_back(term.direction(i));
    json mix = json::array();
    for (Eigen::Index r = 0; r < term.mix.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < term.mix.cols(); ++c) {
        row.push_back(json::array({term.mix(r, c).real(), term.mix(r, c).imag()}));
      }
      mix.push_back(std::move(row));
    }
    terms.push_back({{"t", term.t}, {"theta", term.theta}, {"direction", direction}, {"mix", mix}});
  }
  return {{"terms", std::move(terms)}};
}

FilterParams filter_params_from_json(const json& j) {
  only_keys(j, {"terms"}, "filter params");
  if (!j["terms"].is_array()) fail(ErrorCode::Format, "filter params 'terms' must be an array");
  FilterParams params;
  std::size_t index = 0;
  for (const auto& item : j["terms"]) {
    const std::string where = "filter term " + std::to_string(index++);
    only_keys(item, {"t", "theta", "direction", "mix"}, where);
    FilterTerm term;
    term.t = number(item["t"], where + " t");
    term.theta = number(item["theta"], where + " theta");
    const auto& dir = item["direction"];
    if (!dir.is_array()) fail(ErrorCode::Format, where + " direction must be an array");
    term.direction.resize(static_cast<Eigen::Index>(dir.size()));
    for (std::size_t i = 0; i < dir.size(); ++i) term.direction(static_cast<Eigen::Index>(i)) = number(dir[i], where);
    const auto& mix = item["mix"];
    if (!mix.is_array() || mix.empty() || !mix.front().is_array()) {
      fail(ErrorCode::Format, where + " mix must be a non-empty array of rows");
    }
    term.mix.resize(static_cast<Eigen::Index>(mix.size()), static_cast<Eigen::Index>(mix.front().size()));
    for (std::size_t r = 0; r < mix.size(); ++r) {
      if (!mix[r].is_array() || mix[r].size() != mix.front().size()) {
        fail(ErrorCode::Format, where + " mix rows must have equal length");
      }
      for (std::size_t c = 0; c < mix[r].size(); ++c) {
        const auto& z = mix[r][c];
        if (!z.is_array() || z.size() != 2) fail(ErrorCode::Format, where + " mix entries must be [re, im]");
        term.mix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            Complex(number(z[0], where), number(z[1], where));
      }
    }
    params.terms.push_back(std::move(term));
  }
  try {
    params.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Format, e.what());
  }
  return params;
}

FilterParams load_filter_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  try {
    return filter_params_from_json(j);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

void save_filter_params(const FilterParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(params).dump(2) << "\n";
}

}  // namespace schro
