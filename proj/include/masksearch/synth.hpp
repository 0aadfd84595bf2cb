#pragma once

#include <cstdint>
#include <filesystem>

#include "masksearch/catalog.hpp"
#include "masksearch/mask.hpp"
#include "masksearch/rng.hpp"

namespace masksearch {

enum class MaskDistribution {
  blobs,    // Gaussian blobs over a uniform background in [0, 0.2)
  bimodal,  // half the masks in [0, 0.05), half in [0.95, 1]
  uniform,  // every pixel uniform in [0, 1)
};

struct SynthConfig {
  int images = 250;
  int masks_per_image = 2;  // mask i of an image has model_id = mask_type = 1 + i
  int height = 64;
  int width = 64;
  int labels = 5;
  std::uint64_t seed = 1;
  MaskDistribution distribution = MaskDistribution::blobs;
  bool write_images = false;  // also write a P6 image per image record
};

/// Writes masks/<mask_id>.msk (MSK1), optional images/<image_id>.ppm and
/// catalog.jsonl under `dir`, and returns the catalog. Deterministic in the
/// config. Mask ids are image_id * masks_per_image + i.
Catalog generate_dataset(const std::filesystem::path& dir, const SynthConfig& config);

/// Same layout without touching the disk; masks are returned in catalog order.
struct InMemoryDataset {
  Catalog catalog;
  std::vector<Mask> masks;
};
InMemoryDataset generate_in_memory(const SynthConfig& config);

MaskDistribution parse_distribution(std::string_view name);

}  // namespace masksearch
