#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "schro/diagnose.hpp"
#include "schro/filter.hpp"
#include "schro/observe.hpp"
#include "schro/pmo.hpp"

namespace schro {

nlohmann::json to_json(const RoutingReport& report);
nlohmann::json to_json(const PMOResult& result);
nlohmann::json to_json(const ShiftReport& report);

/// {"terms": [{"t", "theta", "direction": [...], "mix": [[[re, im], ...], ...]}]}
/// with mix stored row by row.
nlohmann::json to_json(const FilterParams& params);
/// Strict inverse of to_json: unknown keys and shape mismatches throw Error(Format).
FilterParams filter_params_from_json(const nlohmann::json& j);

FilterParams load_filter_params(const std::filesystem::path& path);
void save_filter_params(const FilterParams& params, const std::filesystem::path& path);

/// Nested row-major arrays.
nlohmann::json matrix_to_json(const RMatrix& m);
RMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace schro
