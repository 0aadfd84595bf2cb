#include <gtest/gtest.h>

#include <fstream>

#include "masksearch/catalog.hpp"
#include "masksearch/error.hpp"
#include "test_util.hpp"

using namespace masksearch;
using masksearch::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* const kSmall =
    R"({"kind": "mask", "mask_id": 1, "image_id": 10, "model_id": 1, "mask_type": 1, "path": "m/1.msk"}
{"kind": "mask", "mask_id": 2, "image_id": 10, "model_id": 2, "mask_type": 2, "path": "m/2.msk"}
{"kind": "mask", "mask_id": 3, "image_id": 11, "model_id": 1, "mask_type": 1, "path": "m/3.msk", "height": 4, "width": 6}
{"kind": "image", "image_id": 10, "true_label": 146, "pred_label": 17, "object_roi": {"r0": 0, "c0": 0, "r1": 2, "c1": 2}}
{"kind": "image", "image_id": 11, "path": "img/11.ppm", "true_label": 3, "pred_label": 3}
)";

}  // namespace

TEST(CatalogTest, LoadsMasksAndImages) {
  TempDir dir;
  std::filesystem::create_directories(dir / "m");
  save_mask(Mask::filled(4, 6, 0.25f), dir / "m" / "1.msk");
  write_text(dir / "cat.jsonl", kSmall);
  const Catalog c = Catalog::load(dir / "cat.jsonl");
  EXPECT_EQ(c.masks().size(), 3u);
  EXPECT_EQ(c.images().size(), 2u);
  ASSERT_NE(c.find_mask(2), nullptr);
  EXPECT_EQ(c.find_mask(2)->model_id, 2);
  EXPECT_EQ(c.find_image(10)->object_roi, (Roi{0, 0, 2, 2}));
  EXPECT_EQ(c.find_image(11)->path, "img/11.ppm");
  EXPECT_EQ(c.resolve("m/1.msk"), dir / "m" / "1.msk");
  // Dimensions come from the record when given and from the header otherwise.
  EXPECT_EQ(c.mask_dims(*c.find_mask(3)), std::make_pair(4, 6));
  EXPECT_EQ(c.mask_dims(*c.find_mask(1)), std::make_pair(4, 6));
  EXPECT_THROW((void)c.mask_dims(*c.find_mask(2)), IoError);
}

TEST(CatalogTest, EmptyFileGivesEmptyCatalog) {
  TempDir dir;
  write_text(dir / "empty.jsonl", "");
  const Catalog c = Catalog::load(dir / "empty.jsonl");
  EXPECT_TRUE(c.masks().empty());
  EXPECT_TRUE(c.images().empty());
  EXPECT_THROW(Catalog::load(dir / "absent.jsonl"), IoError);
}

TEST(CatalogTest, MalformedLineReportsLineNumber) {
  TempDir dir;
  write_text(dir / "bad.jsonl",
             "{\"kind\": \"image\", \"image_id\": 1, \"true_label\": 0, \"pred_label\": 0}\n"
             "\n"
             "{\"kind\": \"mask\", \"mask_id\": 1}\n");
  try {
    Catalog::load(dir / "bad.jsonl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  write_text(dir / "garbage.jsonl", "{not json\n");
  EXPECT_THROW(Catalog::load(dir / "garbage.jsonl"), FormatError);
  write_text(dir / "kind.jsonl", "{\"kind\": \"video\"}\n");
  EXPECT_THROW(Catalog::load(dir / "kind.jsonl"), FormatError);
}

TEST(CatalogTest, DuplicateIdsRejected) {
  TempDir dir;
  write_text(dir / "dup.jsonl",
             R"({"kind": "mask", "mask_id": 1, "image_id": 1, "model_id": 1, "mask_type": 1, "path": "a", "height": 1, "width": 1}
{"kind": "mask", "mask_id": 1, "image_id": 2, "model_id": 1, "mask_type": 1, "path": "b", "height": 1, "width": 1}
)");
  EXPECT_THROW(Catalog::load(dir / "dup.jsonl"), CatalogError);
}

TEST(CatalogTest, AppendIsAllOrNothing) {
  TempDir dir;
  write_text(dir / "cat.jsonl", kSmall);
  Catalog c = Catalog::load(dir / "cat.jsonl");
  write_text(dir / "more.jsonl",
             R"({"kind": "mask", "mask_id": 7, "image_id": 12, "model_id": 1, "mask_type": 1, "path": "m/7.msk", "height": 2, "width": 2}
{"kind": "mask", "mask_id": 2, "image_id": 12, "model_id": 1, "mask_type": 1, "path": "m/2b.msk", "height": 2, "width": 2}
)");
  EXPECT_THROW(c.append(dir / "more.jsonl"), CatalogError);
  EXPECT_EQ(c.masks().size(), 3u);
  EXPECT_EQ(c.find_mask(7), nullptr);

  write_text(dir / "ok.jsonl",
             R"({"kind": "mask", "mask_id": 7, "image_id": 12, "model_id": 1, "mask_type": 1, "path": "m/7.msk", "height": 2, "width": 2}
)");
  c.append(dir / "ok.jsonl");
  EXPECT_EQ(c.masks().size(), 4u);
  EXPECT_EQ(c.find_mask(1)->image_id, 10);
}

TEST(CatalogTest, SaveLoadRoundTrip) {
  TempDir dir;
  Catalog c(dir.path());
  c.set_legend(1, "saliency");
  c.add_image({5, std::string("i/5.ppm"), 2, 4, Roi{1, 2, 3, 4}});
  c.add_mask({9, 5, 1, 1, "m/9.msk", 8, 8});
  EXPECT_THROW(c.add_mask({9, 6, 1, 1, "m/x.msk", 8, 8}), CatalogError);
  c.save(dir / "out.jsonl");
  const Catalog back = Catalog::load(dir / "out.jsonl");
  EXPECT_EQ(back.masks(), c.masks());
  EXPECT_EQ(back.images(), c.images());
  EXPECT_EQ(back.legend(), c.legend());
}
