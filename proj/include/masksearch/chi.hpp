#pragma once

// Cumulative Histogram Index (CHI).
//
// Each mask is tiled by a fixed grid of cells (edge cells clipped at the mask
// border). For every cell the index stores a reverse-cumulative histogram over
// B equal-width value buckets: counts[i] is the number of pixels in the cell
// whose bucket is >= i, with bucket(v) = min(floor(v * B), B - 1). The count of
// pixels in a cell-aligned region with bucket in [a, b) is therefore a sum of
// differences counts[a] - counts[b] (counts[B] = 0).
//
// For an arbitrary roi the index uses two aligned regions, the smallest union
// of cells covering the roi and the largest union of cells inside it, and turns
// them into a sound interval [lower, upper] around the exact pixel count.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "masksearch/catalog.hpp"
#include "masksearch/mask.hpp"

namespace masksearch {

struct ChiConfig {
  static constexpr std::uint32_t kMaxBuckets = 65536;

  std::uint32_t buckets = 16;
  std::uint32_t cell_h = 32;
  std::uint32_t cell_w = 32;

  /// Throws ValidationError unless 2 <= buckets <= 65536 and both cell sides >= 1.
  void validate() const;
  [[nodiscard]] double bin_width() const noexcept { return 1.0 / buckets; }

  friend bool operator==(const ChiConfig&, const ChiConfig&) = default;
};

/// Histograms of one mask: grid_rows x grid_cols cells, B counts per cell.
struct MaskHistogram {
  std::uint32_t grid_rows = 0;
  std::uint32_t grid_cols = 0;
  // Mask dimensions. Zero when they cannot be recovered from a stored
  // single-cell grid; bounds then fall back to area-only reasoning.
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  [[nodiscard]] bool dims_known() const noexcept { return height > 0 && width > 0; }
  [[nodiscard]] std::span<const std::uint32_t> cell(std::uint32_t row, std::uint32_t col,
                                                    std::uint32_t buckets) const {
    return std::span<const std::uint32_t>(counts).subspan(
        (static_cast<std::size_t>(row) * grid_cols + col) * buckets, buckets);
  }
  [[nodiscard]] std::int64_t area() const;
};

MaskHistogram compute_histogram(const Mask& mask, const ChiConfig& config);

struct AlignedRegions {
  Roi cover;                 // smallest cell-aligned rectangle containing roi
  std::optional<Roi> inner;  // largest cell-aligned rectangle inside roi
};

AlignedRegions align_roi(const ChiConfig& config, int height, int width, const Roi& roi);

struct BoundPair {
  std::int64_t lower = 0;
  std::int64_t upper = 0;

  friend bool operator==(const BoundPair&, const BoundPair&) = default;
};

/// Thread-safe map from mask_id to histograms. Entries are immutable once
/// published; insertion of a new mask takes an exclusive lock only for the
/// pointer swap.
class Chi {
 public:
  explicit Chi(ChiConfig config);
  Chi(Chi&& other) noexcept;
  Chi& operator=(Chi&& other) noexcept;
  Chi(const Chi&) = delete;
  Chi& operator=(const Chi&) = delete;

  [[nodiscard]] const ChiConfig& config() const noexcept { return config_; }
  [[nodiscard]] bool contains(std::int64_t mask_id) const;
  [[nodiscard]] std::shared_ptr<const MaskHistogram> find(std::int64_t mask_id) const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::vector<std::int64_t> mask_ids() const;

  /// Publishes hist for mask_id. Returns false (and keeps the old entry) when
  /// the mask is already indexed.
  bool insert(std::int64_t mask_id, MaskHistogram hist);

  /// CHI1 binary format, little-endian.
  void save(const std::filesystem::path& path) const;
  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  static Chi load(const std::filesystem::path& path);
  static Chi deserialize(std::span<const std::uint8_t> bytes);

 private:
  ChiConfig config_;
  mutable std::shared_mutex mu_;
  std::map<std::int64_t, std::shared_ptr<const MaskHistogram>> entries_;
};

struct BuildFailure {
  std::int64_t mask_id;
  std::string message;
};

/// Indexes every mask of the catalog. Unloadable masks are reported in
/// `failures` (when given) and left unindexed.
Chi build_index(const Catalog& catalog, const ChiConfig& config,
                std::vector<BuildFailure>* failures = nullptr);

/// Pixels in a cell-aligned region with bucket index in [a, b).
std::int64_t cp_aligned(const Chi& chi, std::int64_t mask_id, const Roi& region, std::uint32_t a,
                        std::uint32_t b);

/// Sound bounds on cp_exact(mask, roi, range).
BoundPair bounds(const Chi& chi, std::int64_t mask_id, const Roi& roi, const ValueRange& range);
BoundPair bounds(const ChiConfig& config, const MaskHistogram& hist, const Roi& roi,
                 const ValueRange& range);

/// Sound bounds on the number of pixels in roi with value strictly above t.
BoundPair bounds_above(const Chi& chi, std::int64_t mask_id, const Roi& roi, double t);
BoundPair bounds_above(const ChiConfig& config, const MaskHistogram& hist, const Roi& roi, double t);

/// Indexes one mask if it is not yet present; returns true when it inserted.
/// Throws IndexError if mask dimensions disagree with an existing entry.
bool index_mask_incremental(Chi& chi, std::int64_t mask_id, const Mask& mask);

/// floor(x * buckets) and ceil(x * buckets) evaluated exactly.
std::int64_t floor_scaled(double x, std::uint32_t buckets);
std::int64_t ceil_scaled(double x, std::uint32_t buckets);

}  // namespace masksearch
