#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "masksearch/mask.hpp"

namespace masksearch {

struct MaskRecord {
  std::int64_t mask_id = 0;
  std::int64_t image_id = 0;
  std::int64_t model_id = 0;
  std::int64_t mask_type = 0;
  std::string path;
  // Optional in the file; filled from the mask header on load when absent.
  std::optional<int> height;
  std::optional<int> width;

  friend bool operator==(const MaskRecord&, const MaskRecord&) = default;
};

struct ImageRecord {
  std::int64_t image_id = 0;
  std::optional<std::string> path;
  std::int64_t true_label = 0;
  std::int64_t pred_label = 0;
  std::optional<Roi> object_roi;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// In-memory metadata catalog backed by a JSON Lines file. Each line is an
/// object whose `kind` is "mask", "image" or "legend". Relative paths are
/// resolved against the directory holding the catalog file.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

  /// Missing file is an IoError; empty file gives an empty catalog.
  static Catalog load(const std::filesystem::path& file);

  /// Merges every record of `file`. All-or-nothing: on a duplicate id or a
  /// malformed line the catalog is left unchanged.
  void append(const std::filesystem::path& file);

  void add_mask(MaskRecord rec);
  void add_image(ImageRecord rec);
  void set_legend(std::int64_t mask_type, std::string name) { legend_[mask_type] = std::move(name); }

  void save(const std::filesystem::path& file) const;

  [[nodiscard]] const std::vector<MaskRecord>& masks() const noexcept { return masks_; }
  [[nodiscard]] const std::vector<ImageRecord>& images() const noexcept { return images_; }
  [[nodiscard]] const std::map<std::int64_t, std::string>& legend() const noexcept { return legend_; }

  [[nodiscard]] const MaskRecord* find_mask(std::int64_t mask_id) const;
  [[nodiscard]] const ImageRecord* find_image(std::int64_t image_id) const;

  [[nodiscard]] const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }
  [[nodiscard]] std::filesystem::path resolve(const std::string& path) const;

  /// (height, width) from the record; throws IoError when unknown.
  [[nodiscard]] std::pair<int, int> mask_dims(const MaskRecord& rec) const;

 private:
  std::filesystem::path base_dir_;
  std::vector<MaskRecord> masks_;
  std::vector<ImageRecord> images_;
  std::unordered_map<std::int64_t, std::size_t> mask_index_;
  std::unordered_map<std::int64_t, std::size_t> image_index_;
  std::map<std::int64_t, std::string> legend_;
};

}  // namespace masksearch
