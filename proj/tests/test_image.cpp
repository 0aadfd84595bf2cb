#include <gtest/gtest.h>

#include "masksearch/error.hpp"
#include "masksearch/image.hpp"
#include "masksearch/rng.hpp"
#include "test_util.hpp"

using namespace masksearch;
using masksearch::testing::TempDir;

namespace {

Image gradient(int h, int w, int channels) {
  Image img{h, w, channels, 255, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w * channels)};
  for (std::size_t i = 0; i < img.bytes.size(); ++i) img.bytes[i] = static_cast<std::uint8_t>(i * 7);
  return img;
}

bool inside(const Roi& roi, int r, int c) { return r >= roi.r0 && r < roi.r1 && c >= roi.c0 && c < roi.c1; }

}  // namespace

TEST(Rng, SplitmixMatchesReferenceOutput) {
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, FirstBytesForSeedSeven) {
  // Values from tests/oracle/derive_rng.py.
  Xorshift64Star rng(7);
  const std::vector<int> expected = {20, 66, 90, 141, 166, 154, 106, 159};
  for (const int e : expected) EXPECT_EQ(rng.next_byte(), e);
}

TEST(Pnm, RoundTripGrayAndColor) {
  TempDir dir;
  for (const int channels : {1, 3}) {
    const Image img = gradient(5, 4, channels);
    const auto path = dir / (channels == 1 ? "g.pgm" : "c.ppm");
    save_pnm(img, path);
    EXPECT_EQ(load_pnm(path), img);
  }
}

TEST(Pnm, RejectsBadHeaders) {
  const std::string p2 = "P2\n1 1\n255\n0";
  EXPECT_THROW(decode_pnm(std::vector<std::uint8_t>(p2.begin(), p2.end())), FormatError);
  const std::string short_payload = "P6\n2 2\n255\nabc";
  EXPECT_THROW(decode_pnm(std::vector<std::uint8_t>(short_payload.begin(), short_payload.end())), FormatError);
}

TEST(Augment, ExactBytesForSmallImage) {
  // 3x3 P5, centre pixel kept; expected stream from tests/oracle/derive_rng.py.
  Image img{3, 3, 1, 255, std::vector<std::uint8_t>(9, 100)};
  const Image out = augment_image(img, Roi{1, 1, 2, 2}, 7);
  const std::vector<std::uint8_t> expected = {20, 66, 90, 141, 100, 166, 154, 106, 159};
  EXPECT_EQ(out.bytes, expected);
}

TEST(Augment, FullRoiIsIdentity) {
  const Image img = gradient(6, 5, 3);
  EXPECT_EQ(augment_image(img, Roi{0, 0, 6, 5}, 99), img);
}

TEST(Augment, DeterministicAndRoiPreserving) {
  const Image img = gradient(16, 12, 3);
  const Roi roi{3, 2, 10, 9};
  const Image a = augment_image(img, roi, 7);
  const Image b = augment_image(img, roi, 7);
  const Image c = augment_image(img, roi, 8);
  EXPECT_EQ(a, b);
  std::size_t outside_diff = 0;
  for (int r = 0; r < img.height; ++r) {
    for (int col = 0; col < img.width; ++col) {
      for (int ch = 0; ch < 3; ++ch) {
        const std::size_t i = (static_cast<std::size_t>(r) * img.width + col) * 3 + ch;
        if (inside(roi, r, col)) {
          EXPECT_EQ(a.bytes[i], img.bytes[i]);
          EXPECT_EQ(c.bytes[i], img.bytes[i]);
        } else if (a.bytes[i] != c.bytes[i]) {
          ++outside_diff;
        }
      }
    }
  }
  // 143 outside pixels x 3 channels; equal bytes happen with chance 1/256 each.
  EXPECT_GT(outside_diff, 380u);
}

TEST(Augment, RespectsSmallMaxval) {
  Image img{4, 4, 1, 15, std::vector<std::uint8_t>(16, 3)};
  const Image out = augment_image(img, Roi{0, 0, 1, 1}, 3);
  for (std::uint8_t v : out.bytes) EXPECT_LE(v, 15);
}

TEST(Augment, RoiOutsideImageThrows) {
  const Image img = gradient(4, 4, 1);
  EXPECT_THROW(augment_image(img, Roi{0, 0, 5, 4}, 1), ValidationError);
}
