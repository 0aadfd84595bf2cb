#include <gtest/gtest.h>

#include <fstream>

#include "masksearch/chi.hpp"
#include "masksearch/error.hpp"
#include "masksearch/synth.hpp"
#include "test_util.hpp"

using namespace masksearch;
using masksearch::testing::random_mask;
using masksearch::testing::random_range;
using masksearch::testing::random_roi;
using masksearch::testing::TempDir;

namespace {

Chi single(const Mask& m, ChiConfig cfg, std::int64_t id = 1) {
  Chi chi(cfg);
  chi.insert(id, compute_histogram(m, cfg));
  return chi;
}

// Top-left 2x2 cell at 0.9, everything else 0.1.
Mask corner_mask() {
  std::vector<float> v(16, 0.1f);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) v[static_cast<std::size_t>(r) * 4 + c] = 0.9f;
  }
  return {4, 4, std::move(v)};
}

}  // namespace

TEST(ChiConfigTest, Validates) {
  EXPECT_NO_THROW((ChiConfig{2, 1, 1}.validate()));
  EXPECT_THROW((ChiConfig{1, 4, 4}.validate()), ValidationError);
  EXPECT_THROW((ChiConfig{0, 4, 4}.validate()), ValidationError);
  EXPECT_THROW((ChiConfig{4, 0, 4}.validate()), ValidationError);
}

TEST(Histogram, CellAreasAndClipping) {
  const ChiConfig cfg{2, 2, 2};
  const MaskHistogram h4 = compute_histogram(Mask::filled(4, 4, 0.3f), cfg);
  EXPECT_EQ(h4.grid_rows * h4.grid_cols, 4u);
  for (std::uint32_t r = 0; r < 2; ++r) {
    for (std::uint32_t c = 0; c < 2; ++c) EXPECT_EQ(h4.cell(r, c, 2)[0], 4u);
  }
  const MaskHistogram h5 = compute_histogram(Mask::filled(5, 4, 0.3f), cfg);
  EXPECT_EQ(h5.grid_rows, 3u);
  EXPECT_EQ(h5.grid_cols, 2u);
  EXPECT_EQ(h5.cell(0, 0, 2)[0], 4u);
  EXPECT_EQ(h5.cell(2, 0, 2)[0], 2u);
  EXPECT_EQ(h5.cell(2, 1, 2)[0], 2u);
  EXPECT_EQ(h5.area(), 20);
  // bucket(0.9) = 1 with two buckets, so every count equals the cell area.
  const MaskHistogram h9 = compute_histogram(Mask::filled(4, 4, 0.9f), cfg);
  for (std::uint32_t r = 0; r < 2; ++r) {
    for (std::uint32_t c = 0; c < 2; ++c) {
      EXPECT_EQ(h9.cell(r, c, 2)[0], 4u);
      EXPECT_EQ(h9.cell(r, c, 2)[1], 4u);
    }
  }
}

TEST(Histogram, CountsNonIncreasingAndTileMask) {
  Xorshift64Star rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 1 + static_cast<int>(rng.next() % 40);
    const int w = 1 + static_cast<int>(rng.next() % 40);
    const ChiConfig cfg{static_cast<std::uint32_t>(2 + rng.next() % 15), static_cast<std::uint32_t>(1 + rng.next() % 9),
                        static_cast<std::uint32_t>(1 + rng.next() % 9)};
    const MaskHistogram hist = compute_histogram(random_mask(rng, h, w), cfg);
    std::uint64_t total = 0;
    for (std::uint32_t r = 0; r < hist.grid_rows; ++r) {
      for (std::uint32_t c = 0; c < hist.grid_cols; ++c) {
        const auto cell = hist.cell(r, c, cfg.buckets);
        total += cell[0];
        for (std::uint32_t i = 1; i < cfg.buckets; ++i) EXPECT_LE(cell[i], cell[i - 1]);
      }
    }
    EXPECT_EQ(total, static_cast<std::uint64_t>(h) * w);
  }
}

TEST(AlignRoi, Examples) {
  const ChiConfig cfg{2, 2, 2};
  const AlignedRegions aligned = align_roi(cfg, 4, 4, Roi{0, 2, 2, 4});
  EXPECT_EQ(aligned.cover, (Roi{0, 2, 2, 4}));
  EXPECT_EQ(aligned.inner, (Roi{0, 2, 2, 4}));
  // Values from tests/oracle/derive_chi.py.
  const AlignedRegions straddle = align_roi(cfg, 4, 4, Roi{1, 1, 3, 3});
  EXPECT_EQ(straddle.cover, (Roi{0, 0, 4, 4}));
  EXPECT_FALSE(straddle.inner.has_value());
  const AlignedRegions corner = align_roi(cfg, 4, 4, Roi{0, 0, 3, 3});
  EXPECT_EQ(corner.cover, (Roi{0, 0, 4, 4}));
  EXPECT_EQ(corner.inner, (Roi{0, 0, 2, 2}));
  // The mask edge counts as a cell boundary.
  const AlignedRegions edge = align_roi(cfg, 5, 5, Roi{1, 1, 5, 5});
  EXPECT_EQ(edge.cover, (Roi{0, 0, 5, 5}));
  EXPECT_EQ(edge.inner, (Roi{2, 2, 5, 5}));
}

TEST(AlignRoi, InnerWithinRoiWithinCover) {
  Xorshift64Star rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int h = 1 + static_cast<int>(rng.next() % 50);
    const int w = 1 + static_cast<int>(rng.next() % 50);
    const ChiConfig cfg{4, static_cast<std::uint32_t>(1 + rng.next() % 12), static_cast<std::uint32_t>(1 + rng.next() % 12)};
    const Roi roi = random_roi(rng, h, w);
    const AlignedRegions a = align_roi(cfg, h, w, roi);
    EXPECT_TRUE(a.cover.r0 <= roi.r0 && a.cover.c0 <= roi.c0 && a.cover.r1 >= roi.r1 && a.cover.c1 >= roi.c1);
    EXPECT_TRUE(a.cover.r1 <= h && a.cover.c1 <= w);
    if (a.inner) {
      EXPECT_TRUE(a.inner->r0 >= roi.r0 && a.inner->c0 >= roi.c0 && a.inner->r1 <= roi.r1 && a.inner->c1 <= roi.c1);
    }
  }
}

TEST(CpAligned, Examples) {
  // 8x8 mask of k/64 values from tests/oracle/derive_chi.py.
  const int k[8][8] = {{14, 3, 35, 31, 28, 17, 13, 11},  {54, 4, 3, 11, 27, 29, 3, 25},
                       {53, 28, 57, 35, 0, 20, 54, 43},  {35, 19, 27, 43, 13, 11, 48, 12},
                       {45, 44, 33, 5, 58, 15, 48, 10},  {37, 46, 24, 8, 5, 29, 37, 10},
                       {29, 12, 48, 35, 58, 46, 20, 47}, {45, 26, 34, 9, 21, 31, 20, 59}};
  std::vector<float> v;
  for (const auto& row : k) {
    for (const int x : row) v.push_back(static_cast<float>(x) / 64.0f);
  }
  const Mask m(8, 8, v);
  const Chi chi = single(m, ChiConfig{4, 4, 4});
  EXPECT_EQ(cp_aligned(chi, 1, Roi{0, 0, 8, 4}, 2, 4), 16);
  EXPECT_EQ(cp_aligned(chi, 1, Roi{0, 0, 8, 4}, 2, 4), cp_exact(m, Roi{0, 0, 8, 4}, ValueRange(0.5, 1.0)));
  EXPECT_EQ(cp_aligned(chi, 1, Roi{0, 0, 8, 8}, 0, 4), 64);
  EXPECT_EQ(cp_aligned(chi, 1, Roi{0, 0, 8, 8}, 3, 3), 0);
  EXPECT_THROW(cp_aligned(chi, 1, Roi{0, 0, 8, 3}, 0, 4), ValidationError);
  EXPECT_THROW(cp_aligned(chi, 2, Roi{0, 0, 8, 8}, 0, 4), IndexError);
}

TEST(Bounds, HandComputedCornerExample) {
  // Values from tests/oracle/derive_chi.py.
  const Mask m = corner_mask();
  const Chi chi = single(m, ChiConfig{2, 2, 2});
  const Roi roi{0, 0, 3, 3};
  EXPECT_EQ(bounds(chi, 1, roi, ValueRange(0.5, 1.0)), (BoundPair{4, 4}));
  EXPECT_EQ(bounds(chi, 1, roi, ValueRange(0.6, 1.0)), (BoundPair{0, 4}));
  EXPECT_EQ(cp_exact(m, roi, ValueRange(0.6, 1.0)), 4);
  EXPECT_EQ(bounds(chi, 1, roi, ValueRange(0.0, 1.0)), (BoundPair{9, 9}));
}

TEST(Bounds, SoundOnRandomTriples) {
  Xorshift64Star rng(2024);
  for (int trial = 0; trial < 3000; ++trial) {
    const int h = 1 + static_cast<int>(rng.next() % 40);
    const int w = 1 + static_cast<int>(rng.next() % 40);
    const ChiConfig cfg{static_cast<std::uint32_t>(2 + rng.next() % 20),
                        static_cast<std::uint32_t>(1 + rng.next() % 10),
                        static_cast<std::uint32_t>(1 + rng.next() % 10)};
    const Mask m = trial % 2 ? random_mask(rng, h, w) : masksearch::testing::noise_mask(rng, h, w);
    const Chi chi = single(m, cfg);
    const Roi roi = random_roi(rng, h, w);
    const ValueRange range = random_range(rng);
    const BoundPair b = bounds(chi, 1, roi, range);
    const std::int64_t exact = cp_exact(m, roi, range);
    ASSERT_LE(0, b.lower);
    ASSERT_LE(b.lower, exact) << to_string(roi) << " [" << range.lv() << ", " << range.uv() << ")";
    ASSERT_LE(exact, b.upper) << to_string(roi) << " [" << range.lv() << ", " << range.uv() << ")";
    ASSERT_LE(b.upper, roi.area());
  }
}

TEST(Bounds, ExactWhenAligned) {
  Xorshift64Star rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const ChiConfig cfg{static_cast<std::uint32_t>(2 + rng.next() % 15), 4, 8};
    const int h = 1 + static_cast<int>(rng.next() % 30);
    const int w = 1 + static_cast<int>(rng.next() % 30);
    const Mask m = random_mask(rng, h, w, 128);
    const Chi chi = single(m, cfg);
    auto edge = [&](int extent, int cell) {
      return std::min(extent, cell * static_cast<int>(rng.next() % static_cast<std::uint64_t>(extent / cell + 2)));
    };
    Roi roi{edge(h, 4), edge(w, 8), edge(h, 4), edge(w, 8)};
    if (roi.r0 > roi.r1) std::swap(roi.r0, roi.r1);
    if (roi.c0 > roi.c1) std::swap(roi.c0, roi.c1);
    if (roi.empty()) continue;
    const auto a = rng.next() % cfg.buckets;
    const auto b = a + 1 + rng.next() % (cfg.buckets - a);
    const ValueRange range(static_cast<double>(a) / cfg.buckets, static_cast<double>(b) / cfg.buckets);
    const BoundPair bp = bounds(chi, 1, roi, range);
    const std::int64_t exact = cp_exact(m, roi, range);
    EXPECT_EQ(bp.lower, exact) << h << "x" << w << " " << to_string(roi) << " B=" << cfg.buckets << " a=" << a << " b=" << b;
    EXPECT_EQ(bp.upper, exact);
  }
}

TEST(Bounds, FinerCellsNeverLoosen) {
  Xorshift64Star rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const Mask m = random_mask(rng, 32, 32);
    const Chi coarse = single(m, ChiConfig{8, 8, 8});
    const Chi fine = single(m, ChiConfig{8, 4, 4});
    const Roi roi = random_roi(rng, 32, 32);
    const ValueRange range = random_range(rng);
    const BoundPair c = bounds(coarse, 1, roi, range);
    const BoundPair f = bounds(fine, 1, roi, range);
    EXPECT_GE(f.lower, c.lower);
    EXPECT_LE(f.upper, c.upper);
  }
}

TEST(Bounds, StrictlyAboveThresholdIsSound) {
  Xorshift64Star rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const Mask m = random_mask(rng, 20, 20, 20);
    const ChiConfig cfg{static_cast<std::uint32_t>(2 + rng.next() % 10), 6, 6};
    const Chi chi = single(m, cfg);
    const Roi roi = random_roi(rng, 20, 20);
    const double t = static_cast<double>(rng.next() % 21) / 20.0;
    std::int64_t above = 0;
    for (int r = roi.r0; r < roi.r1; ++r) {
      for (int c = roi.c0; c < roi.c1; ++c) above += static_cast<double>(m.at(r, c)) > t ? 1 : 0;
    }
    const BoundPair b = bounds_above(chi, 1, roi, t);
    EXPECT_LE(b.lower, above);
    EXPECT_GE(b.upper, above);
  }
}

TEST(BucketArithmetic, ExactScaledFloorCeil) {
  EXPECT_EQ(floor_scaled(0.6, 2), 1);
  EXPECT_EQ(ceil_scaled(0.6, 2), 2);
  EXPECT_EQ(floor_scaled(0.5, 2), 1);
  EXPECT_EQ(ceil_scaled(0.5, 2), 1);
  // 0.1 * 10 rounds to 1.0 in double arithmetic, but the double 0.1 is larger
  // than one tenth, so the exact floor is 1 and the exact ceil is 2.
  EXPECT_EQ(floor_scaled(0.1, 10), 1);
  EXPECT_EQ(ceil_scaled(0.1, 10), 2);
  // 0.7 is below seven tenths: exact floor 6.
  EXPECT_EQ(floor_scaled(0.7, 10), 6);
  EXPECT_EQ(ceil_scaled(0.7, 10), 7);
}

TEST(ChiFile, RoundTripPreservesBounds) {
  TempDir dir;
  Xorshift64Star rng(12);
  const ChiConfig cfg{16, 8, 8};
  Chi chi(cfg);
  std::vector<Mask> masks;
  for (int i = 0; i < 10; ++i) {
    masks.push_back(random_mask(rng, 20 + i, 30 - i));
    chi.insert(i, compute_histogram(masks.back(), cfg));
  }
  chi.save(dir / "idx.chi");
  const Chi back = Chi::load(dir / "idx.chi");
  EXPECT_EQ(back.config(), cfg);
  EXPECT_EQ(back.size(), 10u);
  EXPECT_EQ(back.serialize(), chi.serialize());
  for (int q = 0; q < 100; ++q) {
    const int id = static_cast<int>(rng.next() % 10);
    const Roi roi = random_roi(rng, masks[id].height(), masks[id].width());
    const ValueRange range = random_range(rng);
    EXPECT_EQ(bounds(back, id, roi, range), bounds(chi, id, roi, range));
  }
}

TEST(ChiFile, HeaderLayout) {
  Chi chi(ChiConfig{4, 2, 3});
  chi.insert(5, compute_histogram(Mask::filled(2, 3, 0.5f), chi.config()));
  const auto bytes = chi.serialize();
  // magic, version, B, cell_h, cell_w, count, then id, rows, cols, 1 cell x 4 counts
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 4 + 4 + 8 + 8 + 4 + 4 + 4 * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "CHI1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 4);
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(bytes[16], 3);
  EXPECT_EQ(bytes[20], 1);
  EXPECT_EQ(bytes[28], 5);
  // counts for a 2x3 cell of 0.5 with B=4: bucket 2 -> [6, 6, 6, 0]
  EXPECT_EQ(bytes[44], 6);
  EXPECT_EQ(bytes[48], 6);
  EXPECT_EQ(bytes[52], 6);
  EXPECT_EQ(bytes[56], 0);
}

TEST(ChiFile, RejectsCorruptInput) {
  Chi chi(ChiConfig{4, 4, 4});
  chi.insert(77, compute_histogram(Mask::filled(8, 8, 0.5f), chi.config()));
  auto bytes = chi.serialize();

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    Chi::deserialize(bad_magic);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::bad_magic);
  }
  auto bad_version = bytes;
  bad_version[4] = 9;
  try {
    Chi::deserialize(bad_version);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::version);
  }
  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 10);
  try {
    Chi::deserialize(truncated);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Kind::truncated);
    EXPECT_NE(std::string(e.what()).find("77"), std::string::npos) << e.what();
  }
  auto increasing = bytes;
  increasing[increasing.size() - 4] = 200;  // last count above its predecessor
  EXPECT_THROW(Chi::deserialize(increasing), FormatError);
}

TEST(Incremental, MatchesFullBuildAndIsIdempotent) {
  TempDir dir;
  SynthConfig cfg;
  cfg.images = 5;
  cfg.height = 40;
  cfg.width = 33;
  const Catalog catalog = generate_dataset(dir.path(), cfg);
  const ChiConfig icfg{8, 16, 16};
  const Chi full = build_index(catalog, icfg);
  Chi inc(icfg);
  EXPECT_THROW(bounds(inc, 0, Roi{0, 0, 4, 4}, ValueRange(0.0, 0.5)), IndexError);
  for (const MaskRecord& m : catalog.masks()) {
    const Mask mask = load_mask(catalog.resolve(m.path));
    EXPECT_TRUE(index_mask_incremental(inc, m.mask_id, mask));
    EXPECT_FALSE(index_mask_incremental(inc, m.mask_id, mask));
  }
  EXPECT_EQ(inc.serialize(), full.serialize());
  EXPECT_THROW(index_mask_incremental(inc, 0, Mask::filled(3, 3, 0.1f)), IndexError);
}

TEST(BuildIndex, ReportsUnloadableMasks) {
  TempDir dir;
  SynthConfig cfg;
  cfg.images = 3;
  const Catalog catalog = generate_dataset(dir.path(), cfg);
  std::filesystem::remove(dir / "masks" / "2.msk");
  std::vector<BuildFailure> failures;
  const Chi chi = build_index(catalog, ChiConfig{}, &failures);
  ASSERT_EQ(failures.size(), 1u);
  EXPECT_EQ(failures[0].mask_id, 2);
  EXPECT_EQ(chi.size(), 5u);
  EXPECT_FALSE(chi.contains(2));
}
