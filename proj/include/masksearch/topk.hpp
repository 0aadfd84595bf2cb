#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "masksearch/plan.hpp"

namespace masksearch {

/// One ranked candidate: a key plus a closed interval known to contain its
/// exact metric. `exact` is set once the value is known.
struct Candidate {
  std::int64_t key = 0;
  double lower = 0;
  double upper = 0;
  std::optional<double> exact;
};

enum class Verdict { accept, reject, unknown };

/// Decides `metric cmp threshold` from an interval, if the interval allows it.
Verdict decide(double lower, double upper, Comparator cmp, double threshold);

struct TopKOutcome {
  std::vector<std::size_t> ranked;  // indices into the candidate list, best first
  std::vector<bool> resolved;        // candidate was resolved through the callback
};

/// Exact top-k over bounded candidates. Ties break by ascending key; with
/// descending == false the smallest values rank first. Steps:
///  1. tau = k-th best lower bound (mirrored for ascending order);
///  2. drop candidates whose upper bound cannot reach tau;
///  3. resolve the rest in order of most optimistic bound, stopping once k
///     exact values beat every unresolved candidate's optimistic bound.
/// `resolve(i)` returns the exact value of candidate i.
TopKOutcome bounded_topk(std::vector<Candidate>& candidates, std::size_t k, bool descending,
                         const std::function<double(std::size_t)>& resolve);

}  // namespace masksearch
