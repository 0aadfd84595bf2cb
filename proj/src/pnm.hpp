#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace masksearch::detail {

struct PnmHeader {
  int channels;  // 1 for P5, 3 for P6
  int width;
  int height;
  int maxval;
  std::size_t payload_offset;
};

/// Parses a binary P5/P6 header (comments allowed); throws FormatError.
PnmHeader parse_pnm_header(std::span<const std::uint8_t> bytes);

}  // namespace masksearch::detail
