#include "masksearch/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace masksearch {

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::uint64_t pick(Xorshift64Star& rng, std::uint64_t n) { return rng.next() % n; }

std::string roi_text(const Roi& r) { return to_string(r); }

Roi random_rect(Xorshift64Star& rng, int h, int w) {
  const int r0 = static_cast<int>(pick(rng, static_cast<std::uint64_t>(h)));
  const int c0 = static_cast<int>(pick(rng, static_cast<std::uint64_t>(w)));
  const int r1 = r0 + 1 + static_cast<int>(pick(rng, static_cast<std::uint64_t>(h - r0)));
  const int c1 = c0 + 1 + static_cast<int>(pick(rng, static_cast<std::uint64_t>(w - c0)));
  return {r0, c0, r1, c1};
}

// Edge on a cell boundary or the mask edge.
int aligned_edge(Xorshift64Star& rng, int extent, int cell) {
  const int cells = (extent + cell - 1) / cell;
  const int k = static_cast<int>(pick(rng, static_cast<std::uint64_t>(cells + 1)));
  return std::min(k * cell, extent);
}

Roi aligned_rect(Xorshift64Star& rng, int h, int w, const ChiConfig& cfg) {
  for (;;) {
    int r0 = aligned_edge(rng, h, static_cast<int>(cfg.cell_h));
    int r1 = aligned_edge(rng, h, static_cast<int>(cfg.cell_h));
    int c0 = aligned_edge(rng, w, static_cast<int>(cfg.cell_w));
    int c1 = aligned_edge(rng, w, static_cast<int>(cfg.cell_w));
    if (r0 > r1) std::swap(r0, r1);
    if (c0 > c1) std::swap(c0, c1);
    if (r0 < r1 && c0 < c1) return {r0, c0, r1, c1};
  }
}

struct Range {
  double lv;
  double uv;
};

Range random_range(Xorshift64Star& rng, const WorkloadOptions& o) {
  const std::uint64_t steps = o.aligned ? o.index.buckets : 20;
  const std::uint64_t a = pick(rng, steps);
  const std::uint64_t b = a + 1 + pick(rng, steps - a);
  return {static_cast<double>(a) / static_cast<double>(steps), static_cast<double>(b) / static_cast<double>(steps)};
}

std::string range_text(const Range& r) { return "(" + num(r.lv) + ", " + num(r.uv) + ")"; }

std::string roi_choice(Xorshift64Star& rng, const WorkloadOptions& o, std::int64_t& area) {
  if (o.aligned) {
    const Roi r = aligned_rect(rng, o.height, o.width, o.index);
    area = r.area();
    return roi_text(r);
  }
  const std::uint64_t choice = pick(rng, o.object_roi ? 3 : 2);
  if (choice == 0) {
    area = static_cast<std::int64_t>(o.height) * o.width;
    return "full_img";
  }
  if (choice == 2) {
    area = static_cast<std::int64_t>(o.height) * o.width / 8;  // rough scale for thresholds
    return "object";
  }
  const Roi r = random_rect(rng, o.height, o.width);
  area = r.area();
  return roi_text(r);
}

std::string cmp_text(Xorshift64Star& rng) {
  static const char* const kCmp[] = {">", ">=", "<", "<="};
  return kCmp[pick(rng, 4)];
}

std::string filter_query(Xorshift64Star& rng, const WorkloadOptions& o) {
  std::int64_t area = 0;
  const std::string roi = roi_choice(rng, o, area);
  const std::string cp = "CP(mask, " + roi + ", " + range_text(random_range(rng, o)) + ")";
  std::string where = pick(rng, 3) == 0 ? "model_id = 1 AND " : "";
  if (!o.aligned && pick(rng, 3) == 0) {
    const double frac = static_cast<double>(pick(rng, 21)) / 20.0;
    where += cp + " / AREA(" + roi + ") " + cmp_text(rng) + " " + num(frac);
  } else {
    const auto t = static_cast<std::int64_t>(pick(rng, static_cast<std::uint64_t>(area) + 1));
    where += cp + " " + cmp_text(rng) + " " + std::to_string(t);
  }
  return "SELECT mask_id FROM MasksDatabaseView WHERE " + where + ";";
}

std::string topk_query(Xorshift64Star& rng, const WorkloadOptions& o) {
  std::int64_t area = 0;
  const std::string roi = roi_choice(rng, o, area);
  const std::string cp = "CP(mask, " + roi + ", " + range_text(random_range(rng, o)) + ")";
  const std::string dir = pick(rng, 2) == 0 ? "DESC" : "ASC";
  const std::string k = std::to_string(1 + pick(rng, static_cast<std::uint64_t>(o.max_limit)));
  const std::string where = pick(rng, 3) == 0 ? " WHERE model_id = 2" : "";
  if (!o.aligned && pick(rng, 3) == 0) {
    return "SELECT mask_id, " + cp + " / AREA(" + roi + ") AS frac FROM MasksDatabaseView" + where +
           " ORDER BY frac " + dir + " LIMIT " + k + ";";
  }
  return "SELECT mask_id FROM MasksDatabaseView" + where + " ORDER BY " + cp + " " + dir + " LIMIT " + k + ";";
}

std::string aggregation_query(Xorshift64Star& rng, const WorkloadOptions& o) {
  std::int64_t area = 0;
  const std::string roi = roi_choice(rng, o, area);
  const Range range = random_range(rng, o);
  const std::string head = "SELECT image_id, ";
  const std::string from = " FROM MasksDatabaseView WHERE mask_type IN (1, 2) GROUP BY image_id";
  const std::string dir = pick(rng, 2) == 0 ? " DESC" : " ASC";
  const std::string limit = " LIMIT " + std::to_string(1 + pick(rng, static_cast<std::uint64_t>(o.max_limit)));
  const std::string t = num(static_cast<double>(1 + pick(rng, 9)) / 10.0);
  const std::string bin_range = pick(rng, 4) == 0 ? "(0, 0.5)" : "(0.5, 1)";
  std::string metric;
  switch (pick(rng, 4)) {
    case 0: {
      static const char* const kAgg[] = {"SUM", "AVG", "MIN", "MAX"};
      metric = std::string(kAgg[pick(rng, 4)]) + "(CP(mask, " + roi + ", " + range_text(range) + "))";
      break;
    }
    case 1:
      metric = "CP(" + std::string(pick(rng, 2) == 0 ? "intersect" : "union") + "(mask > " + t + "), " + roi + ", " +
               bin_range + ")";
      break;
    default:
      metric = "CP(intersect(mask > " + t + "), " + roi + ", (0.5, 1)) / CP(union(mask > " + t + "), " + roi +
               ", (0.5, 1))";
      break;
  }
  switch (pick(rng, 3)) {
    case 0: {  // HAVING only
      const bool ratio = metric.find(" / ") != std::string::npos;
      const std::string threshold = ratio ? num(static_cast<double>(pick(rng, 11)) / 10.0)
                                          : std::to_string(pick(rng, static_cast<std::uint64_t>(area) + 1));
      return head + metric + " AS score" + from + " HAVING score " + cmp_text(rng) + " " + threshold + ";";
    }
    case 1:  // HAVING and ORDER BY
      return head + metric + " AS score" + from + " HAVING score >= 0 ORDER BY score" + dir + limit + ";";
    default:
      return head + metric + " AS score" + from + " ORDER BY score" + dir + limit + ";";
  }
}

}  // namespace

std::string random_query(Xorshift64Star& rng, const WorkloadOptions& options, QueryKind kind) {
  switch (kind) {
    case QueryKind::filter: return filter_query(rng, options);
    case QueryKind::topk: return topk_query(rng, options);
    case QueryKind::aggregation: return aggregation_query(rng, options);
  }
  return {};
}

std::vector<std::string> generate_workload(std::size_t n, std::uint64_t seed, const WorkloadOptions& options) {
  Xorshift64Star rng(seed);
  const bool grouped = options.grouped && !options.aligned;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t slot = i % (grouped ? 3 : 2);
    const QueryKind kind = slot == 0 ? QueryKind::filter : slot == 1 ? QueryKind::topk : QueryKind::aggregation;
    out.push_back(random_query(rng, options, kind));
  }
  return out;
}

std::vector<std::string> reference_queries(int height, int width) {
  // Reference geometry is a 256x256 image with roi ((50, 50), (200, 200)).
  const double sr = height / 256.0;
  const double sc = width / 256.0;
  const Roi roi{static_cast<int>(std::lround(50 * sr)), static_cast<int>(std::lround(50 * sc)),
                static_cast<int>(std::lround(200 * sr)), static_cast<int>(std::lround(200 * sc))};
  const auto scale = [&](double count) { return std::to_string(std::llround(count * sr * sc)); };
  const std::string r = roi_text(roi);
  return {
      "SELECT mask_id FROM MasksDatabaseView WHERE model_id = 1 AND CP(mask, " + r + ", (0.6, 1.0)) > " +
          scale(5000) + ";",
      "SELECT mask_id FROM MasksDatabaseView WHERE model_id = 1 AND CP(mask, object, (0.8, 1.0)) > " +
          scale(15000) + ";",
      "SELECT mask_id FROM MasksDatabaseView WHERE model_id = 1 ORDER BY CP(mask, " + r +
          ", (0.8, 1.0)) DESC LIMIT 25;",
      "SELECT image_id, AVG(CP(mask, object, (0.8, 1.0))) AS score FROM MasksDatabaseView WHERE mask_type IN (1, 2) "
      "GROUP BY image_id ORDER BY score DESC LIMIT 25;",
      "SELECT image_id FROM MasksDatabaseView WHERE mask_type IN (1, 2) GROUP BY image_id "
      "ORDER BY CP(intersect(mask), object, (0.8, 1.0)) DESC LIMIT 25;",
  };
}

}  // namespace masksearch
