#include "masksearch/mask.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>

#include "masksearch/error.hpp"
#include "pnm.hpp"

namespace masksearch {

namespace {

constexpr std::uint8_t kMsk1Magic[4] = {'M', 'S', 'K', '1'};
constexpr std::size_t kMsk1HeaderSize = 12;

std::uint32_t read_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

bool is_msk1(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 4 && std::equal(kMsk1Magic, kMsk1Magic + 4, bytes.begin());
}

MaskHeader decode_msk1_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMsk1HeaderSize) {
    throw FormatError(FormatError::Kind::malformed_header, "MSK1 header shorter than 12 bytes");
  }
  const std::uint32_t h = read_u32le(bytes.data() + 4);
  const std::uint32_t w = read_u32le(bytes.data() + 8);
  if (h == 0 || w == 0 || h > 1u << 20 || w > 1u << 20) {
    throw FormatError(FormatError::Kind::malformed_header,
                      "MSK1 dimensions out of range: " + std::to_string(h) + "x" + std::to_string(w));
  }
  return {MaskFormat::msk1, static_cast<int>(h), static_cast<int>(w)};
}

Mask decode_msk1(std::span<const std::uint8_t> bytes) {
  const MaskHeader hdr = decode_msk1_header(bytes);
  const std::size_t n = static_cast<std::size_t>(hdr.height) * hdr.width;
  if (bytes.size() - kMsk1HeaderSize < n * 4) {
    throw FormatError(FormatError::Kind::truncated,
                      "MSK1 payload truncated: expected " + std::to_string(n * 4) + " bytes, got " +
                          std::to_string(bytes.size() - kMsk1HeaderSize));
  }
  if (bytes.size() - kMsk1HeaderSize > n * 4) {
    throw FormatError(FormatError::Kind::malformed, "MSK1 has " + std::to_string(bytes.size() - kMsk1HeaderSize - n * 4) +
                                                        " trailing bytes after the payload");
  }
  std::vector<float> values(n);
  const std::uint8_t* p = bytes.data() + kMsk1HeaderSize;
  for (std::size_t i = 0; i < n; ++i, p += 4) {
    const std::uint32_t bits = read_u32le(p);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw FormatError(FormatError::Kind::value_out_of_range,
                        "MSK1 value out of [0,1] at index " + std::to_string(i));
    }
    values[i] = v;
  }
  return Mask(hdr.height, hdr.width, std::move(values));
}

Mask decode_pgm(std::span<const std::uint8_t> bytes) {
  const detail::PnmHeader hdr = detail::parse_pnm_header(bytes);
  if (hdr.channels != 1) {
    throw FormatError(FormatError::Kind::malformed_header, "mask PGM must be P5 (grayscale)");
  }
  if (hdr.maxval != 255) {
    throw FormatError(FormatError::Kind::malformed_header, "mask PGM must have maxval 255");
  }
  const std::size_t n = static_cast<std::size_t>(hdr.height) * hdr.width;
  if (bytes.size() - hdr.payload_offset < n) {
    throw FormatError(FormatError::Kind::truncated, "PGM payload truncated");
  }
  std::vector<float> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = static_cast<float>(bytes[hdr.payload_offset + i]) / 255.0f;
  }
  return Mask(hdr.height, hdr.width, std::move(values));
}

}  // namespace

void require_roi_within(const Roi& roi, int height, int width) {
  if (!roi.valid_for(height, width)) {
    throw ValidationError("roi " + to_string(roi) + " out of bounds for " + std::to_string(height) +
                          "x" + std::to_string(width) + " mask");
  }
}

std::string to_string(const Roi& roi) {
  return "((" + std::to_string(roi.r0) + ", " + std::to_string(roi.c0) + "), (" +
         std::to_string(roi.r1) + ", " + std::to_string(roi.c1) + "))";
}

ValueRange::ValueRange(double lv, double uv) : lv_(lv), uv_(uv) {
  if (!(lv >= 0.0 && uv <= 1.0 && lv < uv)) {
    throw ValidationError("malformed value range: need 0 <= lv < uv <= 1");
  }
}

Mask::Mask(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height < 1 || width < 1) {
    throw ValidationError("mask dimensions must be positive");
  }
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("mask value count does not match dimensions");
  }
  for (float v : values_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw ValidationError("mask value outside [0,1]");
    }
  }
}

Mask Mask::filled(int height, int width, float value) {
  return Mask(height, width,
              std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0), value));
}

Mask decode_mask(std::span<const std::uint8_t> bytes) {
  if (is_msk1(bytes)) return decode_msk1(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  throw FormatError(FormatError::Kind::bad_magic, "unknown mask format (expected MSK1 or P5)");
}

std::vector<std::uint8_t> encode_msk1(const Mask& mask) {
  std::vector<std::uint8_t> out(kMsk1Magic, kMsk1Magic + 4);
  out.reserve(kMsk1HeaderSize + static_cast<std::size_t>(mask.size()) * 4);
  put_u32le(out, static_cast<std::uint32_t>(mask.height()));
  put_u32le(out, static_cast<std::uint32_t>(mask.width()));
  for (float v : mask.values()) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32le(out, bits);
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path, bool drop_cache) {
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  if (drop_cache) ::posix_fadvise(fd, 0, 0, POSIX_FADV_DONTNEED);
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw IoError("cannot read " + path.string() + ": " + std::strerror(err));
    }
    if (n == 0) break;
    out.insert(out.end(), buf, buf + n);
  }
  ::close(fd);
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

Mask load_mask(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_mask(bytes);
}

void save_mask(const Mask& mask, const std::filesystem::path& path) {
  write_file(path, encode_msk1(mask));
}

MaskHeader probe_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> head(256);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  if (is_msk1(head)) return decode_msk1_header(head);
  if (head.size() >= 2 && head[0] == 'P' && head[1] == '5') {
    const auto hdr = detail::parse_pnm_header(head);
    return {MaskFormat::pgm, hdr.height, hdr.width};
  }
  throw FormatError(FormatError::Kind::bad_magic, "unknown mask format: " + path.string());
}

std::int64_t cp_exact(const Mask& mask, const Roi& roi, const ValueRange& range) {
  require_roi_within(roi, mask.height(), mask.width());
  std::int64_t count = 0;
  for (int r = roi.r0; r < roi.r1; ++r) {
    const auto row = mask.row(r);
    for (int c = roi.c0; c < roi.c1; ++c) {
      if (range.contains(row[c])) ++count;
    }
  }
  return count;
}

Mask threshold_mask(const Mask& mask, double t) {
  std::vector<float> out(mask.values().size());
  std::transform(mask.values().begin(), mask.values().end(), out.begin(),
                 [t](float v) { return static_cast<double>(v) > t ? 1.0f : 0.0f; });
  return Mask(mask.height(), mask.width(), std::move(out));
}

Mask combine_masks(std::span<const Mask> masks, CombineOp op) {
  if (masks.empty()) throw ValidationError("combine_masks needs at least one mask");
  const int h = masks.front().height();
  const int w = masks.front().width();
  for (const Mask& m : masks) {
    if (m.height() != h || m.width() != w) {
      throw ValidationError("combine_masks: dimension mismatch");
    }
    for (float v : m.values()) {
      if (v != 0.0f && v != 1.0f) throw ValidationError("combine_masks: non-binary input mask");
    }
  }
  std::vector<float> out(masks.front().values().begin(), masks.front().values().end());
  for (const Mask& m : masks.subspan(1)) {
    const auto vals = m.values();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = op == CombineOp::intersect ? std::min(out[i], vals[i]) : std::max(out[i], vals[i]);
    }
  }
  return Mask(h, w, std::move(out));
}

}  // namespace masksearch
