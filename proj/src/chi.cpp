#include "masksearch/chi.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

#include "masksearch/error.hpp"

namespace masksearch {

namespace {

constexpr std::uint8_t kChiMagic[4] = {'C', 'H', 'I', '1'};
constexpr std::uint32_t kChiVersion = 1;

std::uint32_t ceil_div(std::uint32_t a, std::uint32_t b) { return (a + b - 1) / b; }

// Cell index ranges [i0, i1) x [j0, j1).
struct CellRect {
  std::uint32_t i0 = 0, i1 = 0, j0 = 0, j1 = 0;
  [[nodiscard]] bool empty() const noexcept { return i0 >= i1 || j0 >= j1; }
};

std::int64_t sum_cells(const MaskHistogram& h, std::uint32_t buckets, const CellRect& rect,
                       std::uint32_t a, std::uint32_t b) {
  if (rect.empty() || a >= b) return 0;
  std::int64_t total = 0;
  for (std::uint32_t i = rect.i0; i < rect.i1; ++i) {
    for (std::uint32_t j = rect.j0; j < rect.j1; ++j) {
      const auto c = h.cell(i, j, buckets);
      total += static_cast<std::int64_t>(c[a]) - (b < buckets ? c[b] : 0);
    }
  }
  return total;
}

std::int64_t cell_area(const MaskHistogram& h, std::uint32_t buckets, const CellRect& rect) {
  return sum_cells(h, buckets, rect, 0, buckets);
}

CellRect cover_cells(const ChiConfig& cfg, const MaskHistogram& h, const Roi& roi) {
  return {static_cast<std::uint32_t>(roi.r0) / cfg.cell_h,
          std::min(ceil_div(static_cast<std::uint32_t>(roi.r1), cfg.cell_h), h.grid_rows),
          static_cast<std::uint32_t>(roi.c0) / cfg.cell_w,
          std::min(ceil_div(static_cast<std::uint32_t>(roi.c1), cfg.cell_w), h.grid_cols)};
}

CellRect inner_cells(const ChiConfig& cfg, const MaskHistogram& h, const Roi& roi) {
  // A trailing partial cell counts as whole when the roi reaches the mask edge.
  const std::uint32_t i1 = roi.r1 == h.height ? h.grid_rows : static_cast<std::uint32_t>(roi.r1) / cfg.cell_h;
  const std::uint32_t j1 = roi.c1 == h.width ? h.grid_cols : static_cast<std::uint32_t>(roi.c1) / cfg.cell_w;
  return {ceil_div(static_cast<std::uint32_t>(roi.r0), cfg.cell_h), i1,
          ceil_div(static_cast<std::uint32_t>(roi.c0), cfg.cell_w), j1};
}

void require_roi_for(const MaskHistogram& h, const Roi& roi) {
  if (h.dims_known()) {
    require_roi_within(roi, h.height, h.width);
  } else if (roi.empty() || roi.r0 < 0 || roi.c0 < 0 || roi.area() > h.area()) {
    throw ValidationError("roi " + to_string(roi) + " does not fit the indexed mask");
  }
}

// Bucket index limits for a query: pixels with bucket in [outer_lo, outer_hi)
// include every qualifying pixel; pixels with bucket in [inner_lo, inner_hi)
// all qualify.
struct BucketLimits {
  std::uint32_t outer_lo, inner_lo, inner_hi, outer_hi;
};

BoundPair bounds_impl(const ChiConfig& cfg, const MaskHistogram& h, const Roi& roi, BucketLimits lim) {
  require_roi_for(h, roi);
  const std::uint32_t B = cfg.buckets;
  const std::int64_t roi_area = roi.area();

  CellRect cover;
  CellRect inner;
  if (h.dims_known()) {
    cover = cover_cells(cfg, h, roi);
    inner = inner_cells(cfg, h, roi);
  } else {
    // Single cell of unknown shape: the roi covers it iff the areas match.
    cover = {0, 1, 0, 1};
    inner = roi_area == h.area() ? cover : CellRect{};
  }
  const std::int64_t cover_area = cell_area(h, B, cover);
  const std::int64_t inner_area = cell_area(h, B, inner);

  const std::int64_t upper1 = sum_cells(h, B, cover, lim.outer_lo, lim.outer_hi);
  const std::int64_t upper2 = sum_cells(h, B, inner, lim.outer_lo, lim.outer_hi) + roi_area - inner_area;
  const std::int64_t lower1 = sum_cells(h, B, inner, lim.inner_lo, lim.inner_hi);
  const std::int64_t lower2 = sum_cells(h, B, cover, lim.inner_lo, lim.inner_hi) - (cover_area - roi_area);
  return {std::max<std::int64_t>({lower1, lower2, 0}), std::min(upper1, upper2)};
}

std::uint32_t clamp_bucket(std::int64_t v, std::uint32_t buckets) {
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(v, 0, buckets));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Recovers mask dimensions from the clipped areas of edge cells.
void derive_dims(const ChiConfig& cfg, MaskHistogram& h) {
  const std::uint32_t B = cfg.buckets;
  auto area_of = [&](std::uint32_t i, std::uint32_t j) -> std::int64_t { return h.cell(i, j, B)[0]; };
  const std::uint32_t R = h.grid_rows;
  const std::uint32_t C = h.grid_cols;
  std::int64_t height = 0;
  std::int64_t width = 0;
  if (R > 1) width = static_cast<std::int64_t>(C - 1) * cfg.cell_w + area_of(0, C - 1) / cfg.cell_h;
  if (C > 1) height = static_cast<std::int64_t>(R - 1) * cfg.cell_h + area_of(R - 1, 0) / cfg.cell_w;
  if (R > 1 && C == 1 && width > 0) height = static_cast<std::int64_t>(R - 1) * cfg.cell_h + area_of(R - 1, 0) / width;
  if (R == 1 && C > 1 && height > 0) width = static_cast<std::int64_t>(C - 1) * cfg.cell_w + area_of(0, C - 1) / height;
  if (height <= 0 || width <= 0) {
    h.height = h.width = 0;
    return;
  }
  h.height = static_cast<int>(height);
  h.width = static_cast<int>(width);
}

bool geometry_consistent(const ChiConfig& cfg, const MaskHistogram& h) {
  if (!h.dims_known()) return h.grid_rows == 1 && h.grid_cols == 1;
  if (ceil_div(static_cast<std::uint32_t>(h.height), cfg.cell_h) != h.grid_rows ||
      ceil_div(static_cast<std::uint32_t>(h.width), cfg.cell_w) != h.grid_cols) {
    return false;
  }
  for (std::uint32_t i = 0; i < h.grid_rows; ++i) {
    const std::int64_t ch = std::min<std::int64_t>(cfg.cell_h, h.height - static_cast<std::int64_t>(i) * cfg.cell_h);
    for (std::uint32_t j = 0; j < h.grid_cols; ++j) {
      const std::int64_t cw = std::min<std::int64_t>(cfg.cell_w, h.width - static_cast<std::int64_t>(j) * cfg.cell_w);
      if (h.cell(i, j, cfg.buckets)[0] != ch * cw) return false;
    }
  }
  return true;
}

}  // namespace

std::int64_t floor_scaled(double x, std::uint32_t buckets) {
  const double b = buckets;
  auto k = static_cast<std::int64_t>(std::floor(x * b));
  // fma rounds once, so its sign is the sign of the exact x*b - k.
  while (std::fma(x, b, -static_cast<double>(k)) < 0) --k;
  while (std::fma(x, b, -static_cast<double>(k + 1)) >= 0) ++k;
  return k;
}

std::int64_t ceil_scaled(double x, std::uint32_t buckets) {
  const std::int64_t k = floor_scaled(x, buckets);
  return std::fma(x, static_cast<double>(buckets), -static_cast<double>(k)) > 0 ? k + 1 : k;
}

void ChiConfig::validate() const {
  if (buckets < 2) throw ValidationError("CHI config: buckets must be >= 2");
  if (buckets > kMaxBuckets) throw ValidationError("CHI config: buckets must be <= 65536");
  if (cell_h < 1 || cell_w < 1) throw ValidationError("CHI config: cell sides must be >= 1");
}

std::int64_t MaskHistogram::area() const {
  if (grid_rows == 0 || grid_cols == 0 || counts.empty()) return 0;
  const std::size_t buckets = counts.size() / (static_cast<std::size_t>(grid_rows) * grid_cols);
  std::int64_t total = 0;
  for (std::size_t c = 0; c < static_cast<std::size_t>(grid_rows) * grid_cols; ++c) total += counts[c * buckets];
  return total;
}

MaskHistogram compute_histogram(const Mask& mask, const ChiConfig& config) {
  config.validate();
  const std::uint32_t B = config.buckets;
  MaskHistogram h;
  h.height = mask.height();
  h.width = mask.width();
  h.grid_rows = ceil_div(static_cast<std::uint32_t>(mask.height()), config.cell_h);
  h.grid_cols = ceil_div(static_cast<std::uint32_t>(mask.width()), config.cell_w);
  h.counts.assign(static_cast<std::size_t>(h.grid_rows) * h.grid_cols * B, 0);
  const double scale = B;
  for (int r = 0; r < mask.height(); ++r) {
    const auto row = mask.row(r);
    const std::size_t base = static_cast<std::size_t>(r / config.cell_h) * h.grid_cols;
    for (int c = 0; c < mask.width(); ++c) {
      // float * B is exact in double for any 32-bit bucket count
      const auto bucket = std::min<std::uint32_t>(static_cast<std::uint32_t>(row[c] * scale), B - 1);
      ++h.counts[(base + c / config.cell_w) * B + bucket];
    }
  }
  for (std::size_t cell = 0; cell < static_cast<std::size_t>(h.grid_rows) * h.grid_cols; ++cell) {
    std::uint32_t* c = h.counts.data() + cell * B;
    for (std::uint32_t i = B - 1; i-- > 0;) c[i] += c[i + 1];
  }
  return h;
}

AlignedRegions align_roi(const ChiConfig& config, int height, int width, const Roi& roi) {
  config.validate();
  require_roi_within(roi, height, width);
  const int ch = static_cast<int>(config.cell_h);
  const int cw = static_cast<int>(config.cell_w);
  auto up = [](int v, int cell, int limit) { return std::min((v + cell - 1) / cell * cell, limit); };
  auto down = [](int v, int cell, int limit) { return v == limit ? limit : v / cell * cell; };
  AlignedRegions out;
  out.cover = Roi{roi.r0 / ch * ch, roi.c0 / cw * cw, up(roi.r1, ch, height), up(roi.c1, cw, width)};
  const Roi inner{up(roi.r0, ch, height), up(roi.c0, cw, width), down(roi.r1, ch, height), down(roi.c1, cw, width)};
  if (!inner.empty()) out.inner = inner;
  return out;
}

Chi::Chi(ChiConfig config) : config_(config) { config_.validate(); }

Chi::Chi(Chi&& other) noexcept : config_(other.config_) {
  std::unique_lock lock(other.mu_);
  entries_ = std::move(other.entries_);
}

Chi& Chi::operator=(Chi&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    config_ = other.config_;
    entries_ = std::move(other.entries_);
  }
  return *this;
}

bool Chi::contains(std::int64_t mask_id) const {
  std::shared_lock lock(mu_);
  return entries_.contains(mask_id);
}

std::shared_ptr<const MaskHistogram> Chi::find(std::int64_t mask_id) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(mask_id);
  return it == entries_.end() ? nullptr : it->second;
}

std::size_t Chi::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<std::int64_t> Chi::mask_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::int64_t> ids;
  ids.reserve(entries_.size());
  for (const auto& [id, _] : entries_) ids.push_back(id);
  return ids;
}

bool Chi::insert(std::int64_t mask_id, MaskHistogram hist) {
  if (hist.counts.size() != static_cast<std::size_t>(hist.grid_rows) * hist.grid_cols * config_.buckets) {
    throw IndexError("histogram size does not match index config for mask_id " + std::to_string(mask_id));
  }
  auto entry = std::make_shared<const MaskHistogram>(std::move(hist));
  std::unique_lock lock(mu_);
  return entries_.emplace(mask_id, std::move(entry)).second;
}

std::vector<std::uint8_t> Chi::serialize() const {
  std::shared_lock lock(mu_);
  std::vector<std::uint8_t> out(kChiMagic, kChiMagic + 4);
  put_u32(out, kChiVersion);
  put_u32(out, config_.buckets);
  put_u32(out, config_.cell_h);
  put_u32(out, config_.cell_w);
  put_u64(out, entries_.size());
  for (const auto& [id, h] : entries_) {
    put_u64(out, static_cast<std::uint64_t>(id));
    put_u32(out, h->grid_rows);
    put_u32(out, h->grid_cols);
    for (std::uint32_t v : h->counts) put_u32(out, v);
  }
  return out;
}

void Chi::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  // Write-then-rename so readers never see a partial index file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  write_file(tmp, bytes);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move index into place at " + path.string() + ": " + ec.message());
}

Chi Chi::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kChiMagic, kChiMagic + 4, bytes.begin())) {
    throw FormatError(FormatError::Kind::bad_magic, "not a CHI1 index (bad magic)");
  }
  Reader rd(bytes.subspan(4));
  if (!rd.has(4 * 4 + 8)) throw FormatError(FormatError::Kind::truncated, "CHI1 header truncated");
  const std::uint32_t version = rd.u32();
  if (version != kChiVersion) {
    throw FormatError(FormatError::Kind::version, "unsupported CHI1 version " + std::to_string(version));
  }
  ChiConfig cfg;
  cfg.buckets = rd.u32();
  cfg.cell_h = rd.u32();
  cfg.cell_w = rd.u32();
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw FormatError(FormatError::Kind::malformed_header, std::string("CHI1 header: ") + e.what());
  }
  const std::uint64_t n = rd.u64();
  Chi chi(cfg);
  for (std::uint64_t k = 0; k < n; ++k) {
    if (!rd.has(16)) {
      throw FormatError(FormatError::Kind::truncated,
                        "CHI1 truncated before entry " + std::to_string(k) + " of " + std::to_string(n));
    }
    const auto id = static_cast<std::int64_t>(rd.u64());
    MaskHistogram h;
    h.grid_rows = rd.u32();
    h.grid_cols = rd.u32();
    const std::uint64_t cells = static_cast<std::uint64_t>(h.grid_rows) * h.grid_cols;
    if (cells == 0 || cells > (1ULL << 32) || rd.remaining() / 4 / cfg.buckets < cells) {
      throw FormatError(FormatError::Kind::truncated,
                        "CHI1 truncated in histograms of mask_id " + std::to_string(id));
    }
    h.counts.resize(cells * cfg.buckets);
    for (auto& v : h.counts) v = rd.u32();
    for (std::uint64_t c = 0; c < cells; ++c) {
      const std::uint32_t* p = h.counts.data() + c * cfg.buckets;
      if (!std::is_sorted(p, p + cfg.buckets, std::greater<>())) {
        throw FormatError(FormatError::Kind::malformed,
                          "CHI1 counts not non-increasing for mask_id " + std::to_string(id));
      }
    }
    derive_dims(cfg, h);
    if (!geometry_consistent(cfg, h)) {
      throw FormatError(FormatError::Kind::malformed,
                        "CHI1 cell areas inconsistent with grid for mask_id " + std::to_string(id));
    }
    if (!chi.insert(id, std::move(h))) {
      throw FormatError(FormatError::Kind::malformed, "CHI1 duplicate mask_id " + std::to_string(id));
    }
  }
  if (rd.remaining() != 0) throw FormatError(FormatError::Kind::malformed, "CHI1 trailing bytes");
  return chi;
}

Chi Chi::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

Chi build_index(const Catalog& catalog, const ChiConfig& config, std::vector<BuildFailure>* failures) {
  Chi chi(config);
  for (const auto& rec : catalog.masks()) {
    try {
      chi.insert(rec.mask_id, compute_histogram(load_mask(catalog.resolve(rec.path)), config));
    } catch (const Error& e) {
      if (failures) failures->push_back({rec.mask_id, e.what()});
    }
  }
  return chi;
}

namespace {

std::shared_ptr<const MaskHistogram> require_entry(const Chi& chi, std::int64_t mask_id) {
  auto h = chi.find(mask_id);
  if (!h) throw IndexError("mask_id " + std::to_string(mask_id) + " is not indexed");
  return h;
}

}  // namespace

std::int64_t cp_aligned(const Chi& chi, std::int64_t mask_id, const Roi& region, std::uint32_t a,
                        std::uint32_t b) {
  const auto h = require_entry(chi, mask_id);
  const ChiConfig& cfg = chi.config();
  if (a > b || b > cfg.buckets) throw ValidationError("bucket range must satisfy 0 <= a <= b <= B");
  require_roi_for(*h, region);
  if (!h->dims_known()) {
    if (region.area() != h->area()) throw ValidationError("region is not cell-aligned");
    return sum_cells(*h, cfg.buckets, {0, 1, 0, 1}, a, b);
  }
  auto aligned = [](int v, std::uint32_t cell, int limit) {
    return v == limit || v % static_cast<int>(cell) == 0;
  };
  if (!aligned(region.r0, cfg.cell_h, h->height) || !aligned(region.r1, cfg.cell_h, h->height) ||
      !aligned(region.c0, cfg.cell_w, h->width) || !aligned(region.c1, cfg.cell_w, h->width)) {
    throw ValidationError("region " + to_string(region) + " is not cell-aligned");
  }
  return sum_cells(*h, cfg.buckets, cover_cells(cfg, *h, region), a, b);
}

namespace {

// A threshold written as k/B (0.1 with B = 10, say) is usually not exactly
// k/B in binary. It is still the double nearest to k/B, and no float mask
// value lies strictly between the two while B <= 2^16, so it selects exactly
// the pixels of buckets >= k.
std::optional<std::int64_t> boundary_bucket(double x, std::uint32_t buckets) {
  const double k = std::nearbyint(x * buckets);
  if (k / buckets == x) return static_cast<std::int64_t>(k);
  return std::nullopt;
}

}  // namespace

BoundPair bounds(const ChiConfig& config, const MaskHistogram& hist, const Roi& roi, const ValueRange& range) {
  const std::uint32_t B = config.buckets;
  BucketLimits lim{};
  if (const auto k = boundary_bucket(range.lv(), B)) {
    lim.outer_lo = lim.inner_lo = clamp_bucket(*k, B);
  } else {
    lim.outer_lo = clamp_bucket(floor_scaled(range.lv(), B), B);
    lim.inner_lo = clamp_bucket(ceil_scaled(range.lv(), B), B);
  }
  if (range.closed_top()) {
    lim.inner_hi = lim.outer_hi = B;
  } else if (const auto k = boundary_bucket(range.uv(), B)) {
    lim.inner_hi = lim.outer_hi = clamp_bucket(*k, B);
  } else {
    lim.inner_hi = clamp_bucket(floor_scaled(range.uv(), B), B);
    lim.outer_hi = clamp_bucket(ceil_scaled(range.uv(), B), B);
  }
  return bounds_impl(config, hist, roi, lim);
}

BoundPair bounds(const Chi& chi, std::int64_t mask_id, const Roi& roi, const ValueRange& range) {
  return bounds(chi.config(), *require_entry(chi, mask_id), roi, range);
}

BoundPair bounds_above(const ChiConfig& config, const MaskHistogram& hist, const Roi& roi, double t) {
  const std::uint32_t B = config.buckets;
  if (t >= 1.0) {
    require_roi_for(hist, roi);
    return {0, 0};
  }
  if (t < 0.0) {
    require_roi_for(hist, roi);
    return {roi.area(), roi.area()};
  }
  const std::int64_t k = floor_scaled(t, B);
  BucketLimits lim{clamp_bucket(k, B), clamp_bucket(k + 1, B), B, B};
  return bounds_impl(config, hist, roi, lim);
}

BoundPair bounds_above(const Chi& chi, std::int64_t mask_id, const Roi& roi, double t) {
  return bounds_above(chi.config(), *require_entry(chi, mask_id), roi, t);
}

bool index_mask_incremental(Chi& chi, std::int64_t mask_id, const Mask& mask) {
  if (const auto existing = chi.find(mask_id)) {
    if (existing->dims_known() && (existing->height != mask.height() || existing->width != mask.width())) {
      throw IndexError("mask_id " + std::to_string(mask_id) + " dimensions disagree with its index entry");
    }
    return false;
  }
  return chi.insert(mask_id, compute_histogram(mask, chi.config()));
}

}  // namespace masksearch
