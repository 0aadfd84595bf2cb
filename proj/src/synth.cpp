#include "masksearch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "masksearch/error.hpp"
#include "masksearch/image.hpp"

namespace masksearch {

namespace {

struct Blob {
  double row;
  double col;
  double sigma;
  double amplitude;
};

double uniform(Xorshift64Star& rng, double lo, double hi) { return lo + (hi - lo) * rng.next_double(); }

Mask blob_mask(Xorshift64Star& rng, int h, int w, const std::vector<Blob>& shared) {
  const double jitter = std::min(h, w) / 16.0;
  std::vector<Blob> blobs;
  for (const Blob& b : shared) {
    blobs.push_back({b.row + uniform(rng, -jitter, jitter), b.col + uniform(rng, -jitter, jitter), b.sigma,
                     b.amplitude * uniform(rng, 0.8, 1.0)});
  }
  std::vector<float> values(static_cast<std::size_t>(h) * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double v = uniform(rng, 0.0, 0.2);
      for (const Blob& b : blobs) {
        const double dr = r + 0.5 - b.row;
        const double dc = c + 0.5 - b.col;
        v += b.amplitude * std::exp(-(dr * dr + dc * dc) / (2 * b.sigma * b.sigma));
      }
      values[static_cast<std::size_t>(r) * w + c] = static_cast<float>(std::min(v, 1.0));
    }
  }
  return {h, w, std::move(values)};
}

Mask flat_mask(Xorshift64Star& rng, int h, int w, double lo, double hi) {
  std::vector<float> values(static_cast<std::size_t>(h) * w);
  for (float& v : values) v = static_cast<float>(std::min(uniform(rng, lo, hi), 1.0));
  return {h, w, std::move(values)};
}

Roi blob_box(const Blob& b, int h, int w) {
  const double reach = 2 * b.sigma;
  Roi roi{static_cast<int>(std::floor(b.row - reach)), static_cast<int>(std::floor(b.col - reach)),
          static_cast<int>(std::ceil(b.row + reach)), static_cast<int>(std::ceil(b.col + reach))};
  roi.r0 = std::clamp(roi.r0, 0, h - 1);
  roi.c0 = std::clamp(roi.c0, 0, w - 1);
  roi.r1 = std::clamp(roi.r1, roi.r0 + 1, h);
  roi.c1 = std::clamp(roi.c1, roi.c0 + 1, w);
  return roi;
}

template <typename Sink>
Catalog generate(const SynthConfig& cfg, Sink&& sink) {
  if (cfg.images < 0 || cfg.masks_per_image < 1 || cfg.height < 1 || cfg.width < 1 || cfg.labels < 1) {
    throw ValidationError("invalid synthetic dataset config");
  }
  Xorshift64Star rng(cfg.seed);
  Catalog catalog;
  catalog.set_legend(1, "saliency");
  if (cfg.masks_per_image > 1) catalog.set_legend(2, "human_attention");
  const int h = cfg.height;
  const int w = cfg.width;
  const double side = std::min(h, w);
  for (int img = 0; img < cfg.images; ++img) {
    std::vector<Blob> blobs(1 + rng.next() % 3);
    for (Blob& b : blobs) {
      b = {uniform(rng, 0, h), uniform(rng, 0, w), uniform(rng, side / 12, side / 4), uniform(rng, 0.5, 1.0)};
    }
    ImageRecord rec;
    rec.image_id = img;
    rec.true_label = static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(cfg.labels));
    rec.pred_label = rng.next_double() < 0.75
                         ? rec.true_label
                         : static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(cfg.labels));
    rec.object_roi = blob_box(blobs.front(), h, w);
    if (cfg.write_images) {
      Image image{h, w, 3, 255, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w * 3)};
      for (auto& byte : image.bytes) byte = rng.next_byte();
      rec.path = "images/" + std::to_string(img) + ".ppm";
      sink.image(*rec.path, image);
    }
    catalog.add_image(rec);

    for (int i = 0; i < cfg.masks_per_image; ++i) {
      Mask mask = [&] {
        switch (cfg.distribution) {
          case MaskDistribution::bimodal:
            return (img * cfg.masks_per_image + i) % 2 == 0 ? flat_mask(rng, h, w, 0.0, 0.05)
                                                            : flat_mask(rng, h, w, 0.95, 1.0001);
          case MaskDistribution::uniform: return flat_mask(rng, h, w, 0.0, 1.0);
          case MaskDistribution::blobs: break;
        }
        return blob_mask(rng, h, w, blobs);
      }();
      MaskRecord m;
      m.mask_id = static_cast<std::int64_t>(img) * cfg.masks_per_image + i;
      m.image_id = img;
      m.model_id = 1 + i;
      m.mask_type = 1 + i;
      m.path = "masks/" + std::to_string(m.mask_id) + ".msk";
      m.height = h;
      m.width = w;
      sink.mask(m.path, std::move(mask));
      catalog.add_mask(m);
    }
  }
  return catalog;
}

}  // namespace

Catalog generate_dataset(const std::filesystem::path& dir, const SynthConfig& config) {
  std::filesystem::create_directories(dir / "masks");
  if (config.write_images) std::filesystem::create_directories(dir / "images");
  struct {
    const std::filesystem::path& dir;
    void mask(const std::string& rel, Mask m) { save_mask(m, dir / rel); }
    void image(const std::string& rel, const Image& img) { save_pnm(img, dir / rel); }
  } sink{dir};
  Catalog catalog = generate(config, sink);
  catalog.set_base_dir(dir);
  catalog.save(dir / "catalog.jsonl");
  return catalog;
}

InMemoryDataset generate_in_memory(const SynthConfig& config) {
  InMemoryDataset out;
  struct {
    std::vector<Mask>& masks;
    void mask(const std::string&, Mask m) { masks.push_back(std::move(m)); }
    void image(const std::string&, const Image&) {}
  } sink{out.masks};
  out.catalog = generate(config, sink);
  return out;
}

MaskDistribution parse_distribution(std::string_view name) {
  if (name == "blobs") return MaskDistribution::blobs;
  if (name == "bimodal") return MaskDistribution::bimodal;
  if (name == "uniform") return MaskDistribution::uniform;
  throw ValidationError("unknown distribution '" + std::string(name) + "' (expected blobs, bimodal or uniform)");
}

}  // namespace masksearch
