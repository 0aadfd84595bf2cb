#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "masksearch/catalog.hpp"
#include "masksearch/chi.hpp"
#include "masksearch/mask_source.hpp"
#include "masksearch/plan.hpp"

namespace masksearch {

enum class IndexMode { full, incremental };

/// How a candidate (mask or group) was settled.
enum class Decision { accepted, pruned, verified };

struct BoundSegment {
  std::int64_t key = 0;
  double lower = 0;
  double upper = 0;
  Decision decision = Decision::pruned;
};

inline constexpr std::size_t kHistogramBuckets = 32;

/// Distribution of lower and upper bounds over [lo, hi] in equal-width buckets.
struct BoundHistogram {
  double lo = 0;
  double hi = 0;
  std::array<std::uint32_t, kHistogramBuckets> lower{};
  std::array<std::uint32_t, kHistogramBuckets> upper{};
};

struct ExecStats {
  std::size_t total_candidates = 0;  // masks
  std::size_t masks_loaded = 0;
  // Decision counts in mask units; they sum to total_candidates.
  std::size_t accepted = 0;
  std::size_t pruned = 0;
  std::size_t verified = 0;
  std::size_t groups = 0;
  std::size_t excluded_groups = 0;
  std::chrono::nanoseconds wall_time{0};
  BoundHistogram histogram;
  std::vector<BoundSegment> sample;

  [[nodiscard]] double fml() const noexcept {
    return total_candidates == 0 ? 0.0 : static_cast<double>(masks_loaded) / static_cast<double>(total_candidates);
  }
};

struct ResultRow {
  std::int64_t key = 0;
  std::optional<double> value;  // exact metric for ordered queries

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct QueryResult {
  std::vector<ResultRow> rows;
  ExecStats stats;
};

struct ExecOptions {
  IndexMode mode = IndexMode::full;
  unsigned threads = 1;
  std::size_t sample_cap = 1000;
  std::optional<std::chrono::milliseconds> timeout;
};

/// Filter-verification executor. Candidates are settled from CHI bounds where
/// possible; only undecided ones are loaded and checked exactly. Results always
/// equal a full scan. Masks missing from the index get bounds [0, area(roi)];
/// in incremental mode every loaded mask is indexed as a side effect.
class Engine {
 public:
  Engine(const Catalog& catalog, Chi& chi, const MaskSource& source)
      : catalog_(catalog), chi_(chi), source_(source) {}

  QueryResult eval(const CheckedPlan& plan, const ExecOptions& options = {});
  QueryResult eval_filter(const CheckedPlan& plan, const ExecOptions& options = {});
  QueryResult eval_topk(const CheckedPlan& plan, const ExecOptions& options = {});
  QueryResult eval_aggregation(const CheckedPlan& plan, const ExecOptions& options = {});

 private:
  const Catalog& catalog_;
  Chi& chi_;
  const MaskSource& source_;
};

/// Accuracy and per-cell image lists for a classifier's predictions.
struct ConfusionMatrix {
  std::vector<std::int64_t> labels;  // sorted union of true and predicted labels
  // (true, pred) -> image ids ascending
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::int64_t>> cells;
  std::size_t total = 0;
  std::optional<double> accuracy;  // empty when there are no images
};

/// With model_id, only images having a mask from that model are counted.
ConfusionMatrix confusion_matrix(const Catalog& catalog, std::optional<std::int64_t> model_id = std::nullopt);

}  // namespace masksearch
