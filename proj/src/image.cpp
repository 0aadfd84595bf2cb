#include "masksearch/image.hpp"

#include <cctype>
#include <string>

#include "masksearch/error.hpp"
#include "masksearch/rng.hpp"
#include "pnm.hpp"

namespace masksearch {

namespace detail {

PnmHeader parse_pnm_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError(FormatError::Kind::bad_magic, "not a binary PNM (P5/P6) file");
  }
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw FormatError(FormatError::Kind::malformed_header, "malformed PNM header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1L << 24)) throw FormatError(FormatError::Kind::malformed_header, "PNM header value too large");
      ++pos;
    }
    return v;
  };
  PnmHeader hdr{};
  hdr.channels = bytes[1] == '5' ? 1 : 3;
  hdr.width = static_cast<int>(next_int());
  hdr.height = static_cast<int>(next_int());
  hdr.maxval = static_cast<int>(next_int());
  if (hdr.width < 1 || hdr.height < 1 || hdr.maxval < 1 || hdr.maxval > 255) {
    throw FormatError(FormatError::Kind::malformed_header, "unsupported PNM dimensions or maxval");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw FormatError(FormatError::Kind::malformed_header, "PNM header not terminated");
  }
  hdr.payload_offset = pos + 1;
  return hdr;
}

}  // namespace detail

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  const auto hdr = detail::parse_pnm_header(bytes);
  const std::size_t n = static_cast<std::size_t>(hdr.width) * hdr.height * hdr.channels;
  if (bytes.size() - hdr.payload_offset < n) {
    throw FormatError(FormatError::Kind::truncated, "PNM payload truncated");
  }
  Image img;
  img.height = hdr.height;
  img.width = hdr.width;
  img.channels = hdr.channels;
  img.maxval = hdr.maxval;
  img.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(hdr.payload_offset),
                   bytes.begin() + static_cast<std::ptrdiff_t>(hdr.payload_offset + n));
  return img;
}

std::vector<std::uint8_t> encode_pnm(const Image& image) {
  const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width) + " " + std::to_string(image.height) +
                             "\n" + std::to_string(image.maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.bytes.begin(), image.bytes.end());
  return out;
}

Image load_pnm(const std::filesystem::path& path) { return decode_pnm(read_file(path)); }

void save_pnm(const Image& image, const std::filesystem::path& path) {
  write_file(path, encode_pnm(image));
}

Image augment_image(const Image& image, const Roi& roi, std::uint64_t seed) {
  require_roi_within(roi, image.height, image.width);
  Image out = image;
  Xorshift64Star rng(seed);
  std::size_t i = 0;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const bool inside = r >= roi.r0 && r < roi.r1 && c >= roi.c0 && c < roi.c1;
      for (int ch = 0; ch < image.channels; ++ch, ++i) {
        if (inside) continue;
        out.bytes[i] = image.maxval == 255
                           ? rng.next_byte()
                           : static_cast<std::uint8_t>(rng.next() % (static_cast<unsigned>(image.maxval) + 1));
      }
    }
  }
  return out;
}

}  // namespace masksearch
