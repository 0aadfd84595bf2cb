#include <gtest/gtest.h>

#include "masksearch/engine.hpp"
#include "masksearch/error.hpp"
#include "masksearch/oracle.hpp"
#include "masksearch/parser.hpp"
#include "masksearch/synth.hpp"
#include "masksearch/workload.hpp"
#include "test_util.hpp"

using namespace masksearch;
using masksearch::testing::TempDir;

namespace {

// Hand-built dataset: each image gets one mask per entry of `per_image`.
struct Fixture {
  TempDir dir;
  Catalog catalog;

  explicit Fixture(const std::vector<std::vector<Mask>>& per_image) {
    catalog.set_base_dir(dir.path());
    std::int64_t next = 0;
    for (std::size_t img = 0; img < per_image.size(); ++img) {
      ImageRecord ir;
      ir.image_id = static_cast<std::int64_t>(img);
      ir.object_roi = Roi{0, 0, 2, 2};
      catalog.add_image(ir);
      for (std::size_t t = 0; t < per_image[img].size(); ++t) {
        const Mask& m = per_image[img][t];
        const std::string path = std::to_string(next) + ".msk";
        save_mask(m, dir / path);
        catalog.add_mask({next, ir.image_id, static_cast<std::int64_t>(t + 1), static_cast<std::int64_t>(t + 1), path,
                          m.height(), m.width()});
        ++next;
      }
    }
  }
};

QueryResult run(const Catalog& catalog, Chi& chi, const std::string& sql, ExecOptions opts = {}) {
  const MaskSource source(catalog);
  Engine engine(catalog, chi, source);
  return engine.eval(validate(parse(sql), catalog), opts);
}

std::vector<std::int64_t> keys(const QueryResult& r) {
  std::vector<std::int64_t> out;
  for (const auto& row : r.rows) out.push_back(row.key);
  return out;
}

void expect_counts_add_up(const ExecStats& s) {
  EXPECT_EQ(s.accepted + s.pruned + s.verified, s.total_candidates);
  EXPECT_LE(s.masks_loaded, s.total_candidates);
}

Mask binary(int h, int w, const std::vector<Roi>& ones) {
  std::vector<float> v(static_cast<std::size_t>(h) * w, 0.0f);
  for (const Roi& r : ones) {
    for (int i = r.r0; i < r.r1; ++i) {
      for (int j = r.c0; j < r.c1; ++j) v[static_cast<std::size_t>(i) * w + j] = 1.0f;
    }
  }
  return {h, w, std::move(v)};
}

}  // namespace

TEST(EngineFilter, AlignedQueryLoadsNothing) {
  Fixture fx({{Mask::filled(4, 4, 0.9f)}, {Mask::filled(4, 4, 0.1f)}, {binary(4, 4, {{0, 0, 2, 2}})}});
  Chi chi = build_index(fx.catalog, ChiConfig{2, 2, 2});
  const QueryResult r =
      run(fx.catalog, chi, "SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, full_img, (0.5, 1.0)) > 3");
  EXPECT_EQ(keys(r), (std::vector<std::int64_t>{0, 2}));
  EXPECT_EQ(r.stats.masks_loaded, 0u);
  EXPECT_EQ(r.stats.accepted, 2u);
  EXPECT_EQ(r.stats.pruned, 1u);
  EXPECT_EQ(r.stats.verified, 0u);
  expect_counts_add_up(r.stats);
}

TEST(EngineFilter, UnalignedQueryVerifiesOnlyStraddlers) {
  Fixture fx({{Mask::filled(4, 4, 0.9f)}, {binary(4, 4, {{0, 0, 2, 2}})}});
  Chi chi = build_index(fx.catalog, ChiConfig{2, 2, 2});
  // roi ((0,0),(3,3)): mask 0 has 9 pixels for sure; mask 1 has between 4 and 4.
  const QueryResult r =
      run(fx.catalog, chi, "SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, ((0, 0), (3, 3)), (0.6, 1.0)) >= 4");
  EXPECT_EQ(keys(r), (std::vector<std::int64_t>{0, 1}));
  expect_counts_add_up(r.stats);
  const QueryResult strict =
      run(fx.catalog, chi, "SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, ((0, 0), (3, 3)), (0.6, 1.0)) > 4");
  EXPECT_EQ(keys(strict), (std::vector<std::int64_t>{0}));
}

TEST(EngineTopK, IdenticalMasksTieByKey) {
  const Mask m = binary(8, 8, {{1, 1, 5, 6}});
  Fixture fx({{m}, {m}, {m}, {Mask::filled(8, 8, 0.0f)}});
  Chi chi = build_index(fx.catalog, ChiConfig{4, 4, 4});
  const QueryResult r =
      run(fx.catalog, chi, "SELECT mask_id FROM MasksDatabaseView ORDER BY CP(mask, full_img, (0.5, 1.0)) DESC LIMIT 2");
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0], (ResultRow{0, 20.0}));
  EXPECT_EQ(r.rows[1], (ResultRow{1, 20.0}));
  const QueryResult asc =
      run(fx.catalog, chi, "SELECT mask_id FROM MasksDatabaseView ORDER BY CP(mask, full_img, (0.5, 1.0)) ASC LIMIT 2");
  EXPECT_EQ(keys(asc), (std::vector<std::int64_t>{3, 0}));
}

TEST(EngineAggregation, IouOfIdenticalAndDisjointMasks) {
  const Mask a = binary(4, 4, {{0, 0, 2, 2}});
  const Mask b = binary(4, 4, {{2, 2, 4, 4}});
  const Mask empty = Mask::filled(4, 4, 0.0f);
  Fixture fx({{a, a}, {a, b}, {empty, empty}});
  Chi chi = build_index(fx.catalog, ChiConfig{2, 2, 2});
  const std::string iou =
      "SELECT image_id, CP(intersect(mask > 0.5), full_img, (0.5, 1.0)) / CP(union(mask > 0.5), full_img, (0.5, 1.0)) "
      "AS iou FROM MasksDatabaseView WHERE mask_type IN (1, 2) GROUP BY image_id ORDER BY iou DESC LIMIT 3";
  for (const IndexMode mode : {IndexMode::full, IndexMode::incremental}) {
    Chi fresh(ChiConfig{2, 2, 2});
    Chi& use = mode == IndexMode::full ? chi : fresh;
    const QueryResult r = run(fx.catalog, use, iou, {mode});
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_EQ(r.rows[0], (ResultRow{0, 1.0}));
    // Disjoint and both-empty groups score 0; the tie breaks by image id.
    EXPECT_EQ(r.rows[1], (ResultRow{1, 0.0}));
    EXPECT_EQ(r.rows[2], (ResultRow{2, 0.0}));
    EXPECT_EQ(r.stats.groups, 3u);
    expect_counts_add_up(r.stats);
  }
}

TEST(EngineAggregation, GroupsMissingATypeAreExcluded) {
  const Mask a = binary(4, 4, {{0, 0, 2, 2}});
  Fixture fx({{a, a}, {a}});
  Chi chi = build_index(fx.catalog, ChiConfig{2, 2, 2});
  const QueryResult r = run(fx.catalog, chi,
                            "SELECT image_id, SUM(CP(mask, full_img, (0.5, 1.0))) AS s FROM MasksDatabaseView "
                            "WHERE mask_type IN (1, 2) GROUP BY image_id ORDER BY s DESC LIMIT 5");
  EXPECT_EQ(keys(r), (std::vector<std::int64_t>{0}));
  EXPECT_EQ(r.rows[0].value, 8.0);
  EXPECT_EQ(r.stats.excluded_groups, 1u);
  expect_counts_add_up(r.stats);
}

TEST(EngineFilter, MasksMissingFromIndexStillAnswerCorrectly) {
  Fixture fx({{Mask::filled(4, 4, 0.9f)}, {Mask::filled(4, 4, 0.1f)}});
  Chi empty(ChiConfig{2, 2, 2});
  const QueryResult r =
      run(fx.catalog, empty, "SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, full_img, (0.5, 1.0)) > 3");
  EXPECT_EQ(keys(r), (std::vector<std::int64_t>{0}));
  EXPECT_EQ(r.stats.masks_loaded, 2u);
  EXPECT_EQ(empty.size(), 0u);  // full mode never writes to the index
}

TEST(EngineFilter, TimeoutAborts) {
  TempDir dir;
  SynthConfig cfg;
  cfg.images = 40;
  const Catalog catalog = generate_dataset(dir.path(), cfg);
  Chi chi(ChiConfig{});
  ExecOptions opts;
  opts.timeout = std::chrono::milliseconds(0);
  EXPECT_THROW(run(catalog, chi, "SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, full_img, (0.5, 1.0)) > 3", opts),
               QueryTimeout);
}

TEST(EngineFilter, DimensionMismatchWithIndexIsReported) {
  Fixture fx({{Mask::filled(4, 4, 0.9f)}});
  Chi chi(ChiConfig{2, 2, 2});
  chi.insert(0, compute_histogram(Mask::filled(6, 6, 0.9f), chi.config()));
  EXPECT_THROW(run(fx.catalog, chi, "SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, full_img, (0.5, 1.0)) > 3"),
               IndexError);
}

class EngineEquivalence : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    SynthConfig cfg;
    cfg.images = 60;
    cfg.height = 48;
    cfg.width = 40;
    catalog_ = new Catalog(generate_dataset(dir_->path(), cfg));
  }
  static void TearDownTestSuite() {
    delete catalog_;
    delete dir_;
  }
  static TempDir* dir_;
  static Catalog* catalog_;
};

TempDir* EngineEquivalence::dir_ = nullptr;
Catalog* EngineEquivalence::catalog_ = nullptr;

TEST_F(EngineEquivalence, MatchesNaiveScanInEveryMode) {
  const ChiConfig icfg{16, 8, 8};
  Chi full = build_index(*catalog_, icfg);
  Chi inc(icfg);
  WorkloadOptions wopts;
  wopts.height = 48;
  wopts.width = 40;
  auto queries = generate_workload(90, 3, wopts);
  for (const auto& q : reference_queries(48, 40)) queries.push_back(q);
  const MaskSource source(*catalog_);
  for (const std::string& sql : queries) {
    const CheckedPlan plan = validate(parse(sql), *catalog_);
    const QueryResult naive = eval_naive(plan, source);
    Engine ef(*catalog_, full, source);
    Engine ei(*catalog_, inc, source);
    const QueryResult a = ef.eval(plan, {IndexMode::full, 1});
    const QueryResult b = ei.eval(plan, {IndexMode::incremental, 1});
    const QueryResult c = ef.eval(plan, {IndexMode::full, 4});
    ASSERT_EQ(a.rows.size(), naive.rows.size()) << sql;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      EXPECT_EQ(a.rows[i].key, naive.rows[i].key) << sql;
      ASSERT_EQ(a.rows[i].value.has_value(), naive.rows[i].value.has_value()) << sql;
      if (a.rows[i].value) EXPECT_NEAR(*a.rows[i].value, *naive.rows[i].value, 1e-9 * std::max(1.0, std::abs(*naive.rows[i].value))) << sql;
    }
    EXPECT_EQ(keys(b), keys(a)) << sql;
    EXPECT_EQ(keys(c), keys(a)) << sql;
    expect_counts_add_up(a.stats);
    expect_counts_add_up(b.stats);
  }
  // Everything the incremental run loaded is now indexed, and matches a full build.
  for (const auto id : inc.mask_ids()) EXPECT_EQ(inc.find(id)->counts, full.find(id)->counts) << id;
}

TEST_F(EngineEquivalence, IncrementalLoadsShrinkOnRepeat) {
  Chi inc(ChiConfig{16, 8, 8});
  const std::string sql =
      "SELECT mask_id FROM MasksDatabaseView WHERE model_id = 1 AND CP(mask, ((3, 5), (30, 33)), (0.55, 1.0)) > 200";
  const QueryResult first = run(*catalog_, inc, sql, {IndexMode::incremental});
  const QueryResult second = run(*catalog_, inc, sql, {IndexMode::incremental});
  EXPECT_EQ(keys(first), keys(second));
  EXPECT_GT(first.stats.masks_loaded, 0u);
  EXPECT_LE(second.stats.masks_loaded, first.stats.masks_loaded);
  EXPECT_EQ(first.stats.masks_loaded, first.stats.total_candidates);
}

TEST_F(EngineEquivalence, StatsHistogramAndSample) {
  Chi chi = build_index(*catalog_, ChiConfig{16, 8, 8});
  ExecOptions opts;
  opts.sample_cap = 7;
  const QueryResult r =
      run(*catalog_, chi, "SELECT mask_id FROM MasksDatabaseView WHERE CP(mask, ((3, 5), (30, 33)), (0.55, 1.0)) > 200",
          opts);
  EXPECT_EQ(r.stats.total_candidates, catalog_->masks().size());
  EXPECT_LE(r.stats.sample.size(), 7u);
  std::uint64_t lower = 0;
  std::uint64_t upper = 0;
  for (std::size_t i = 0; i < kHistogramBuckets; ++i) {
    lower += r.stats.histogram.lower[i];
    upper += r.stats.histogram.upper[i];
  }
  EXPECT_EQ(lower, r.stats.total_candidates);
  EXPECT_EQ(upper, r.stats.total_candidates);
  for (const BoundSegment& s : r.stats.sample) EXPECT_LE(s.lower, s.upper);
  EXPECT_GE(r.stats.fml(), 0.0);
  EXPECT_LE(r.stats.fml(), 1.0);
}

TEST(Confusion, CountsCellsAndAccuracy) {
  Catalog c;
  c.add_image({0, std::nullopt, 146, 17, std::nullopt});
  c.add_image({1, std::nullopt, 146, 146, std::nullopt});
  c.add_image({2, std::nullopt, 146, 17, std::nullopt});
  c.add_image({3, std::nullopt, 17, 17, std::nullopt});
  c.add_mask({10, 0, 1, 1, "x", 4, 4});
  c.add_mask({11, 1, 2, 1, "x", 4, 4});
  const ConfusionMatrix all = confusion_matrix(c);
  EXPECT_EQ(all.total, 4u);
  EXPECT_EQ(all.labels, (std::vector<std::int64_t>{17, 146}));
  EXPECT_EQ(all.cells.at({146, 17}), (std::vector<std::int64_t>{0, 2}));
  ASSERT_TRUE(all.accuracy);
  EXPECT_DOUBLE_EQ(*all.accuracy, 0.5);
  const ConfusionMatrix m1 = confusion_matrix(c, 1);
  EXPECT_EQ(m1.total, 1u);
  EXPECT_DOUBLE_EQ(*m1.accuracy, 0.0);
  EXPECT_FALSE(confusion_matrix(Catalog{}).accuracy);
  EXPECT_FALSE(confusion_matrix(c, 99).accuracy);
}
