#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace masksearch {

/// Half-open rectangle in (row, col) order: rows [r0, r1), cols [c0, c1).
struct Roi {
  int r0 = 0;
  int c0 = 0;
  int r1 = 0;
  int c1 = 0;

  [[nodiscard]] std::int64_t area() const noexcept {
    if (r1 <= r0 || c1 <= c0) return 0;
    return static_cast<std::int64_t>(r1 - r0) * (c1 - c0);
  }
  [[nodiscard]] bool empty() const noexcept { return area() == 0; }
  [[nodiscard]] bool valid_for(int height, int width) const noexcept {
    return 0 <= r0 && r0 < r1 && r1 <= height && 0 <= c0 && c0 < c1 && c1 <= width;
  }
  [[nodiscard]] bool contains(const Roi& other) const noexcept {
    return r0 <= other.r0 && c0 <= other.c0 && other.r1 <= r1 && other.c1 <= c1;
  }

  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Throws ValidationError unless roi is non-empty and inside a height x width grid.
void require_roi_within(const Roi& roi, int height, int width);

std::string to_string(const Roi& roi);

/// Pixel value range [lv, uv); when uv == 1.0 the top is closed so 1.0 is admitted.
class ValueRange {
 public:
  /// Throws ValidationError unless 0 <= lv < uv <= 1.
  ValueRange(double lv, double uv);

  [[nodiscard]] double lv() const noexcept { return lv_; }
  [[nodiscard]] double uv() const noexcept { return uv_; }
  [[nodiscard]] bool closed_top() const noexcept { return uv_ == 1.0; }

  [[nodiscard]] bool contains(double v) const noexcept {
    return v >= lv_ && (v < uv_ || (uv_ == 1.0 && v == 1.0));
  }

  friend bool operator==(const ValueRange&, const ValueRange&) = default;

 private:
  double lv_;
  double uv_;
};

/// Row-major grid of pixel values in [0, 1].
class Mask {
 public:
  /// Throws FormatError when dimensions are non-positive, the value count does
  /// not match, or a value lies outside [0, 1].
  Mask(int height, int width, std::vector<float> values);

  static Mask filled(int height, int width, float value);

  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] std::int64_t size() const noexcept {
    return static_cast<std::int64_t>(height_) * width_;
  }
  [[nodiscard]] float at(int row, int col) const noexcept {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  [[nodiscard]] std::span<const float> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const float> row(int r) const noexcept {
    return std::span<const float>(values_).subspan(static_cast<std::size_t>(r) * width_, width_);
  }
  [[nodiscard]] Roi full() const noexcept { return Roi{0, 0, height_, width_}; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int height_;
  int width_;
  std::vector<float> values_;
};

enum class MaskFormat { msk1, pgm };

struct MaskHeader {
  MaskFormat format;
  int height;
  int width;
};

/// Decodes MSK1 or binary PGM (P5, maxval 255; v = byte / 255).
Mask decode_mask(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_msk1(const Mask& mask);

Mask load_mask(const std::filesystem::path& path);
void save_mask(const Mask& mask, const std::filesystem::path& path);

/// Reads only the header of an MSK1/PGM file.
MaskHeader probe_mask(const std::filesystem::path& path);

/// Ground-truth count of pixels in roi whose value lies in range.
std::int64_t cp_exact(const Mask& mask, const Roi& roi, const ValueRange& range);

/// 1.0 where v > t, else 0.0.
Mask threshold_mask(const Mask& mask, double t);

enum class CombineOp { intersect, unite };

/// Pixelwise min (intersect) or max (unite) of binary {0, 1} masks of equal size.
Mask combine_masks(std::span<const Mask> masks, CombineOp op);

/// Reads a whole file; throws IoError.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path, bool drop_cache = false);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace masksearch
