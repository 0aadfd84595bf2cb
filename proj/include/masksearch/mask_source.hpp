#pragma once

#include <atomic>
#include <cstdint>

#include "masksearch/catalog.hpp"
#include "masksearch/mask.hpp"

namespace masksearch {

/// Loads mask payloads named by a catalog. With cold_reads the page cache for
/// each file is dropped before reading so every load goes to storage.
class MaskSource {
 public:
  explicit MaskSource(const Catalog& catalog, bool cold_reads = false)
      : catalog_(&catalog), cold_reads_(cold_reads) {}

  /// Throws IoError / FormatError (message names the mask_id).
  [[nodiscard]] Mask load(std::int64_t mask_id) const;

  /// Total loads since construction.
  [[nodiscard]] std::uint64_t loads() const noexcept { return loads_.load(); }
  [[nodiscard]] const Catalog& catalog() const noexcept { return *catalog_; }
  void set_cold_reads(bool cold) noexcept { cold_reads_ = cold; }

 private:
  const Catalog* catalog_;
  bool cold_reads_;
  mutable std::atomic<std::uint64_t> loads_{0};
};

}  // namespace masksearch
