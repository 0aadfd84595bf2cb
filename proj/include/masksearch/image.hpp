#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "masksearch/mask.hpp"

namespace masksearch {

/// 8-bit grayscale (P5) or RGB (P6) raster, interleaved row-major.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  int maxval = 255;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const Image&, const Image&) = default;
};

Image decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const Image& image);
Image load_pnm(const std::filesystem::path& path);
void save_pnm(const Image& image, const std::filesystem::path& path);

/// Keeps pixels inside roi and replaces every channel byte outside it with
/// Xorshift64Star(seed).next_byte(), drawn in row-major, channel-minor order
/// over outside pixels only (next() % (maxval + 1) when maxval < 255).
Image augment_image(const Image& image, const Roi& roi, std::uint64_t seed);

}  // namespace masksearch
