#include "masksearch/json_io.hpp"

#include <cmath>

#include "masksearch/error.hpp"

namespace masksearch {

using nlohmann::json;

namespace {

// JSON has no infinities; unbounded ends are written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json rows_to_json(const std::vector<ResultRow>& rows) {
  json out = json::array();
  for (const ResultRow& r : rows) {
    out.push_back({{"key", r.key}, {"value", r.value ? json(*r.value) : json(nullptr)}});
  }
  return out;
}

json stats_to_json(const ExecStats& stats, bool with_sample) {
  json hist = {{"lo", stats.histogram.lo},
               {"hi", stats.histogram.hi},
               {"buckets", kHistogramBuckets},
               {"lower", stats.histogram.lower},
               {"upper", stats.histogram.upper}};
  json out = {{"total_candidates", stats.total_candidates},
              {"masks_loaded", stats.masks_loaded},
              {"fml", stats.fml()},
              {"accepted", stats.accepted},
              {"pruned", stats.pruned},
              {"verified", stats.verified},
              {"groups", stats.groups},
              {"excluded_groups", stats.excluded_groups},
              {"wall_time_ms", std::chrono::duration<double, std::milli>(stats.wall_time).count()},
              {"histogram", std::move(hist)}};
  if (with_sample) {
    json segments = json::array();
    for (const BoundSegment& s : stats.sample) {
      segments.push_back({{"key", s.key},
                          {"lower", finite_or_null(s.lower)},
                          {"upper", finite_or_null(s.upper)},
                          {"decision", to_string(s.decision)}});
    }
    out["segments"] = std::move(segments);
  }
  return out;
}

json to_json(const ConfusionMatrix& m) {
  json cells = json::array();
  for (const auto& [labels, ids] : m.cells) {
    cells.push_back({{"true_label", labels.first}, {"pred_label", labels.second}, {"image_ids", ids}});
  }
  return {{"labels", m.labels},
          {"cells", std::move(cells)},
          {"total", m.total},
          {"accuracy", m.accuracy ? json(*m.accuracy) : json(nullptr)}};
}

json to_json(const Roi& roi) { return {{"r0", roi.r0}, {"c0", roi.c0}, {"r1", roi.r1}, {"c1", roi.c1}}; }

json to_json(const ImageRecord& image) {
  return {{"image_id", image.image_id},
          {"path", image.path ? json(*image.path) : json(nullptr)},
          {"true_label", image.true_label},
          {"pred_label", image.pred_label},
          {"object_roi", image.object_roi ? to_json(*image.object_roi) : json(nullptr)}};
}

Roi roi_from_json(const json& j) {
  try {
    if (j.is_object()) {
      return {j.at("r0").get<int>(), j.at("c0").get<int>(), j.at("r1").get<int>(), j.at("c1").get<int>()};
    }
    if (j.is_array() && j.size() == 2 && j[0].size() == 2 && j[1].size() == 2) {
      return {j[0][0].get<int>(), j[0][1].get<int>(), j[1][0].get<int>(), j[1][1].get<int>()};
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad roi: ") + e.what());
  }
  throw ValidationError("bad roi: expected {r0, c0, r1, c1} or [[r0, c0], [r1, c1]]");
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::accepted: return "accepted";
    case Decision::pruned: return "pruned";
    case Decision::verified: return "verified";
  }
  return "?";
}

std::string_view to_string(IndexMode mode) { return mode == IndexMode::full ? "full" : "incremental"; }

IndexMode parse_index_mode(std::string_view name) {
  if (name == "full") return IndexMode::full;
  if (name == "incremental") return IndexMode::incremental;
  throw ValidationError("unknown mode '" + std::string(name) + "' (expected full or incremental)");
}

}  // namespace masksearch
