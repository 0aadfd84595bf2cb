#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masksearch/chi.hpp"
#include "masksearch/plan.hpp"
#include "masksearch/rng.hpp"

namespace masksearch {

/// Random query generator for benchmarks and equivalence tests. Queries are
/// emitted as SQL text so they also exercise the parser.
struct WorkloadOptions {
  int height = 64;
  int width = 64;
  // Cell-aligned rois and bucket-aligned ranges under `index`; only filter and
  // top-k queries are produced, and their bounds are exact.
  bool aligned = false;
  ChiConfig index;
  bool grouped = true;       // include aggregation queries (needs mask_types 1 and 2)
  bool object_roi = true;    // images carry object rois
  int max_limit = 25;
};

std::string random_query(Xorshift64Star& rng, const WorkloadOptions& options, QueryKind kind);

/// n queries cycling filter, top-k and (when grouped) aggregation.
std::vector<std::string> generate_workload(std::size_t n, std::uint64_t seed, const WorkloadOptions& options);

/// The five evaluated query shapes (selection by pixel count on a fixed and an
/// object roi, top-25 by count, top-25 images by mean count and by intersected
/// count), scaled to the given mask size.
std::vector<std::string> reference_queries(int height, int width);

}  // namespace masksearch
