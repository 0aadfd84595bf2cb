#pragma once

#include <nlohmann/json.hpp>

#include "masksearch/catalog.hpp"
#include "masksearch/engine.hpp"

namespace masksearch {

/// [{"key": k, "value": v | null}, ...]
nlohmann::json rows_to_json(const std::vector<ResultRow>& rows);

/// Counts, fml, wall time and the bound histogram; the segment sample is
/// included only when `with_sample` is set.
nlohmann::json stats_to_json(const ExecStats& stats, bool with_sample = false);

nlohmann::json to_json(const ConfusionMatrix& matrix);
nlohmann::json to_json(const Roi& roi);
nlohmann::json to_json(const ImageRecord& image);

/// Accepts {"r0", "c0", "r1", "c1"} or [[r0, c0], [r1, c1]].
Roi roi_from_json(const nlohmann::json& j);

std::string_view to_string(Decision decision);
std::string_view to_string(IndexMode mode);
IndexMode parse_index_mode(std::string_view name);

}  // namespace masksearch
