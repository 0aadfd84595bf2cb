#include "masksearch/topk.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace masksearch {

Verdict decide(double lower, double upper, Comparator cmp, double threshold) {
  switch (cmp) {
    case Comparator::gt:
      if (lower > threshold) return Verdict::accept;
      if (upper <= threshold) return Verdict::reject;
      break;
    case Comparator::ge:
      if (lower >= threshold) return Verdict::accept;
      if (upper < threshold) return Verdict::reject;
      break;
    case Comparator::lt:
      if (upper < threshold) return Verdict::accept;
      if (lower >= threshold) return Verdict::reject;
      break;
    case Comparator::le:
      if (upper <= threshold) return Verdict::accept;
      if (lower > threshold) return Verdict::reject;
      break;
  }
  return Verdict::unknown;
}

namespace {

// Scores are oriented so that larger is better in both directions.
struct Scored {
  double score;
  std::int64_t key;
  std::size_t index;
};

// a ranks ahead of b
bool ahead(double a_score, std::int64_t a_key, double b_score, std::int64_t b_key) {
  return a_score > b_score || (a_score == b_score && a_key < b_key);
}

}  // namespace

TopKOutcome bounded_topk(std::vector<Candidate>& candidates, std::size_t k, bool descending,
                         const std::function<double(std::size_t)>& resolve) {
  const std::size_t n = candidates.size();
  TopKOutcome out;
  out.resolved.assign(n, false);
  k = std::min(k, n);
  if (k == 0) return out;

  auto orient = [descending](double v) { return descending ? v : -v; };
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    Candidate& c = candidates[i];
    if (!c.exact && c.lower == c.upper) c.exact = c.lower;
    if (c.exact) {
      lo[i] = hi[i] = orient(*c.exact);
    } else {
      lo[i] = descending ? c.lower : -c.upper;
      hi[i] = descending ? c.upper : -c.lower;
    }
  }

  std::vector<double> sorted_lo = lo;
  std::nth_element(sorted_lo.begin(), sorted_lo.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted_lo.end(),
                   std::greater<>());
  const double tau = sorted_lo[k - 1];

  // Worst of the current best-k exact values sits on top.
  auto worse = [](const Scored& a, const Scored& b) { return ahead(a.score, a.key, b.score, b.key); };
  std::priority_queue<Scored, std::vector<Scored>, decltype(worse)> best(worse);
  auto offer = [&](Scored s) {
    best.push(s);
    if (best.size() > k) best.pop();
  };

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < n; ++i) {
    if (hi[i] < tau) continue;
    if (candidates[i].exact) {
      offer({lo[i], candidates[i].key, i});
    } else {
      pending.push_back(i);
    }
  }
  std::sort(pending.begin(), pending.end(), [&](std::size_t a, std::size_t b) {
    return ahead(hi[a], candidates[a].key, hi[b], candidates[b].key);
  });

  for (const std::size_t i : pending) {
    if (best.size() == k && ahead(best.top().score, best.top().key, hi[i], candidates[i].key)) break;
    const double value = resolve(i);
    candidates[i].exact = value;
    out.resolved[i] = true;
    offer({orient(value), candidates[i].key, i});
  }

  std::vector<Scored> ranked;
  while (!best.empty()) {
    ranked.push_back(best.top());
    best.pop();
  }
  std::reverse(ranked.begin(), ranked.end());
  for (const Scored& s : ranked) out.ranked.push_back(s.index);
  return out;
}

}  // namespace masksearch
