#include "masksearch/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "masksearch/error.hpp"
#include "masksearch/topk.hpp"

namespace masksearch {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo;
  double hi;
};

double safe_mul(double a, double b) { return (a == 0 || b == 0) ? 0.0 : a * b; }

Interval add(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
Interval sub(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
Interval mul(Interval a, Interval b) {
  const double p[] = {safe_mul(a.lo, b.lo), safe_mul(a.lo, b.hi), safe_mul(a.hi, b.lo), safe_mul(a.hi, b.hi)};
  return {*std::min_element(std::begin(p), std::end(p)), *std::max_element(std::begin(p), std::end(p))};
}
Interval div(Interval a, Interval b) {
  if (b.lo > 0 || b.hi < 0) {
    const double q[] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
    return {*std::min_element(std::begin(q), std::end(q)), *std::max_element(std::begin(q), std::end(q))};
  }
  if (b.lo == 0 && b.hi == 0) return {0, 0};  // x / 0 := 0
  if (a.lo >= 0 && b.lo >= 0) return {0, a.hi == 0 ? 0 : kInf};
  return {-kInf, kInf};
}

double exact_div(double a, double b) { return b == 0 ? 0.0 : a / b; }

Interval apply(char op, Interval a, Interval b) {
  switch (op) {
    case '+': return add(a, b);
    case '-': return sub(a, b);
    case '*': return mul(a, b);
    default: return div(a, b);
  }
}

double apply_exact(char op, double a, double b) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    default: return exact_div(a, b);
  }
}

// CP over a binary derived mask counts ones, zeros, both or neither
// depending on which of {0, 1} the value range admits.
Interval binary_cp(Interval ones, std::int64_t area, const ValueRange& range) {
  const bool has1 = range.contains(1.0);
  const bool has0 = range.contains(0.0);
  const auto a = static_cast<double>(area);
  if (has1 && has0) return {a, a};
  if (has1) return ones;
  if (has0) return {a - ones.hi, a - ones.lo};
  return {0, 0};
}

bool is_iou(const BinaryOp& b) {
  if (b.op != '/') return false;
  const auto* num = std::get_if<CpCall>(&b.lhs->node);
  const auto* den = std::get_if<CpCall>(&b.rhs->node);
  return num && den && num->target.aggregated && den->target.aggregated &&
         num->target.op == CombineOp::intersect && den->target.op == CombineOp::unite &&
         num->target.effective_threshold() == den->target.effective_threshold() && num->roi == den->roi &&
         num->range == den->range && num->range.contains(1.0) && !num->range.contains(0.0);
}

struct MaskCtx {
  std::int64_t id;
  int h;
  int w;
  const ImageRecord* image;
};

struct GroupCtx {
  std::int64_t image_id;
  std::vector<MaskCtx> members;
  const ImageRecord* image;
};

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const std::size_t i = next++;
          if (i >= n) break;
          fn(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class QueryRun {
 public:
  QueryRun(const Catalog& catalog, Chi& chi, const MaskSource& source, const ExecOptions& options)
      : catalog_(catalog), chi_(chi), source_(source), options_(options), start_(Clock::now()) {}

  MaskCtx mask_ctx(std::int64_t id) const {
    const MaskRecord* rec = catalog_.find_mask(id);
    if (!rec) throw ValidationError("mask_id " + std::to_string(id) + " not in catalog");
    const auto [h, w] = catalog_.mask_dims(*rec);
    return {id, h, w, catalog_.find_image(rec->image_id)};
  }

  GroupCtx group_ctx(const CheckedPlan::Group& g) const {
    GroupCtx ctx{g.image_id, {}, catalog_.find_image(g.image_id)};
    for (const std::int64_t id : g.members) ctx.members.push_back(mask_ctx(id));
    return ctx;
  }

  // ---- bounds

  Interval bound(const Expr& e, const MaskCtx& m) const {
    return std::visit(
        [&](const auto& node) -> Interval {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return {node.value, node.value};
          } else if constexpr (std::is_same_v<T, AreaCall>) {
            const auto a = static_cast<double>(resolve_roi(node.roi, m.h, m.w, m.image).area());
            return {a, a};
          } else if constexpr (std::is_same_v<T, CpCall>) {
            if (node.target.aggregated) throw ValidationError("MASK_AGG outside a grouped query");
            const Roi roi = resolve_roi(node.roi, m.h, m.w, m.image);
            const auto hist = entry(m);
            if (!hist) return {0, static_cast<double>(roi.area())};
            const BoundPair b = bounds(chi_.config(), *hist, roi, node.range);
            return {static_cast<double>(b.lower), static_cast<double>(b.upper)};
          } else if constexpr (std::is_same_v<T, AggCall>) {
            throw ValidationError("scalar aggregate outside a grouped query");
          } else {
            const Interval r = apply(node.op, bound(*node.lhs, m), bound(*node.rhs, m));
            return r;
          }
        },
        e.node);
  }

  Interval bound(const Expr& e, const GroupCtx& g) const {
    return std::visit(
        [&](const auto& node) -> Interval {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return {node.value, node.value};
          } else if constexpr (std::is_same_v<T, AreaCall>) {
            const auto a = static_cast<double>(group_roi(node.roi, g).area());
            return {a, a};
          } else if constexpr (std::is_same_v<T, CpCall>) {
            if (!node.target.aggregated) throw ValidationError("raw CP in a grouped query must be aggregated");
            const Roi roi = group_roi(node.roi, g);
            const std::int64_t area = roi.area();
            const double t = node.target.effective_threshold();
            const bool intersect = node.target.op == CombineOp::intersect;
            double sum_lo = 0;
            double sum_hi = 0;
            double min_hi = kInf;
            double max_lo = 0;
            for (const MaskCtx& m : g.members) {
              const auto hist = entry(m);
              const BoundPair b = hist ? bounds_above(chi_.config(), *hist, roi, t) : BoundPair{0, area};
              sum_lo += static_cast<double>(b.lower);
              sum_hi += static_cast<double>(b.upper);
              min_hi = std::min(min_hi, static_cast<double>(b.upper));
              max_lo = std::max(max_lo, static_cast<double>(b.lower));
            }
            const auto n = static_cast<double>(g.members.size());
            const auto a = static_cast<double>(area);
            const Interval ones = intersect ? Interval{std::max(0.0, sum_lo - (n - 1) * a), min_hi}
                                            : Interval{max_lo, std::min(sum_hi, a)};
            return binary_cp(ones, area, node.range);
          } else if constexpr (std::is_same_v<T, AggCall>) {
            std::vector<Interval> parts;
            for (const MaskCtx& m : g.members) parts.push_back(bound(*node.arg, m));
            return combine(node.fn, parts);
          } else {
            Interval r = apply(node.op, bound(*node.lhs, g), bound(*node.rhs, g));
            if (is_iou(node)) r = {std::max(r.lo, 0.0), std::min(r.hi, 1.0)};
            return r;
          }
        },
        e.node);
  }

  // ---- exact values

  double exact(const Expr& e, const MaskCtx& m, const Mask& mask) const {
    return std::visit(
        [&](const auto& node) -> double {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, AreaCall>) {
            return static_cast<double>(resolve_roi(node.roi, m.h, m.w, m.image).area());
          } else if constexpr (std::is_same_v<T, CpCall>) {
            return static_cast<double>(cp_exact(mask, resolve_roi(node.roi, m.h, m.w, m.image), node.range));
          } else if constexpr (std::is_same_v<T, AggCall>) {
            throw ValidationError("scalar aggregate outside a grouped query");
          } else {
            return apply_exact(node.op, exact(*node.lhs, m, mask), exact(*node.rhs, m, mask));
          }
        },
        e.node);
  }

  double exact(const Expr& e, const GroupCtx& g, const std::vector<Mask>& masks) const {
    return std::visit(
        [&](const auto& node) -> double {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Constant>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, AreaCall>) {
            return static_cast<double>(group_roi(node.roi, g).area());
          } else if constexpr (std::is_same_v<T, CpCall>) {
            const Roi roi = group_roi(node.roi, g);
            const double t = node.target.effective_threshold();
            const bool intersect = node.target.op == CombineOp::intersect;
            std::int64_t ones = 0;
            for (int r = roi.r0; r < roi.r1; ++r) {
              for (int c = roi.c0; c < roi.c1; ++c) {
                bool all = true;
                bool any = false;
                for (const Mask& mk : masks) {
                  const bool on = static_cast<double>(mk.at(r, c)) > t;
                  all = all && on;
                  any = any || on;
                }
                if (intersect ? all : any) ++ones;
              }
            }
            const auto v = static_cast<double>(ones);
            return binary_cp({v, v}, roi.area(), node.range).lo;
          } else if constexpr (std::is_same_v<T, AggCall>) {
            std::vector<Interval> parts;
            for (std::size_t i = 0; i < g.members.size(); ++i) {
              const double v = exact(*node.arg, g.members[i], masks[i]);
              parts.push_back({v, v});
            }
            return combine(node.fn, parts).lo;
          } else {
            return apply_exact(node.op, exact(*node.lhs, g, masks), exact(*node.rhs, g, masks));
          }
        },
        e.node);
  }

  // ---- loading

  Mask load(const MaskCtx& m) {
    if (options_.timeout && Clock::now() - start_ > *options_.timeout) {
      throw QueryTimeout("query exceeded timeout of " + std::to_string(options_.timeout->count()) + " ms");
    }
    Mask mask = source_.load(m.id);
    ++loaded_;
    if (options_.mode == IndexMode::incremental) index_mask_incremental(chi_, m.id, mask);
    return mask;
  }

  std::vector<Mask> load(const GroupCtx& g) {
    std::vector<Mask> masks;
    masks.reserve(g.members.size());
    for (const MaskCtx& m : g.members) masks.push_back(load(m));
    return masks;
  }

  [[nodiscard]] std::size_t loaded() const { return loaded_.load(); }
  [[nodiscard]] Clock::time_point start() const { return start_; }
  [[nodiscard]] const ExecOptions& options() const { return options_; }

 private:
  std::shared_ptr<const MaskHistogram> entry(const MaskCtx& m) const {
    auto hist = chi_.find(m.id);
    if (hist && hist->dims_known() && (hist->height != m.h || hist->width != m.w)) {
      throw IndexError("index entry for mask_id " + std::to_string(m.id) + " does not match its dimensions");
    }
    return hist;
  }

  static Roi group_roi(const RoiSpec& spec, const GroupCtx& g) {
    const MaskCtx& first = g.members.front();
    return resolve_roi(spec, first.h, first.w, g.image);
  }

  static Interval combine(ScalarAgg fn, const std::vector<Interval>& parts) {
    Interval acc{0, 0};
    switch (fn) {
      case ScalarAgg::sum:
      case ScalarAgg::avg:
        for (const Interval& p : parts) acc = add(acc, p);
        if (fn == ScalarAgg::avg && !parts.empty()) {
          const auto n = static_cast<double>(parts.size());
          acc = {acc.lo / n, acc.hi / n};
        }
        return acc;
      case ScalarAgg::min:
        acc = {kInf, kInf};
        for (const Interval& p : parts) acc = {std::min(acc.lo, p.lo), std::min(acc.hi, p.hi)};
        return parts.empty() ? Interval{0, 0} : acc;
      case ScalarAgg::max:
        acc = {-kInf, -kInf};
        for (const Interval& p : parts) acc = {std::max(acc.lo, p.lo), std::max(acc.hi, p.hi)};
        return parts.empty() ? Interval{0, 0} : acc;
    }
    return acc;
  }

  const Catalog& catalog_;
  Chi& chi_;
  const MaskSource& source_;
  const ExecOptions& options_;
  Clock::time_point start_;
  std::atomic<std::size_t> loaded_{0};
};

void fill_bound_stats(ExecStats& stats, const std::vector<BoundSegment>& segments, std::size_t cap) {
  double lo = 0;
  double hi = 0;
  for (const auto& s : segments) {
    if (std::isfinite(s.lower)) lo = std::min(lo, s.lower);
    if (std::isfinite(s.upper)) hi = std::max(hi, s.upper);
  }
  stats.histogram = BoundHistogram{};
  stats.histogram.lo = lo;
  stats.histogram.hi = hi;
  const double width = hi > lo ? (hi - lo) / static_cast<double>(kHistogramBuckets) : 1.0;
  auto bucket = [&](double v) {
    if (!std::isfinite(v)) return v < 0 ? std::size_t{0} : kHistogramBuckets - 1;
    const auto b = static_cast<std::int64_t>((v - lo) / width);
    return static_cast<std::size_t>(std::clamp<std::int64_t>(b, 0, kHistogramBuckets - 1));
  };
  for (const auto& s : segments) {
    ++stats.histogram.lower[bucket(s.lower)];
    ++stats.histogram.upper[bucket(s.upper)];
  }
  stats.sample.clear();
  if (segments.size() <= cap) {
    stats.sample = segments;
  } else {
    for (std::size_t i = 0; i < cap; ++i) stats.sample.push_back(segments[i * segments.size() / cap]);
  }
}

void finish(QueryResult& result, const QueryRun& run, const std::vector<BoundSegment>& segments) {
  result.stats.masks_loaded = run.loaded();
  fill_bound_stats(result.stats, segments, run.options().sample_cap);
  result.stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - run.start());
}

}  // namespace

QueryResult Engine::eval(const CheckedPlan& plan, const ExecOptions& options) {
  switch (plan.plan.kind) {
    case QueryKind::filter: return eval_filter(plan, options);
    case QueryKind::topk: return eval_topk(plan, options);
    case QueryKind::aggregation: return eval_aggregation(plan, options);
  }
  throw ValidationError("unknown query kind");
}

QueryResult Engine::eval_filter(const CheckedPlan& checked, const ExecOptions& options) {
  const QueryPlan& plan = checked.plan;
  if (plan.kind != QueryKind::filter) throw ValidationError("eval_filter needs a filter plan");
  QueryRun run(catalog_, chi_, source_, options);
  QueryResult result;
  const std::size_t n = checked.candidates.size();
  result.stats.total_candidates = n;

  std::vector<MaskCtx> ctx;
  ctx.reserve(n);
  for (const std::int64_t id : checked.candidates) ctx.push_back(run.mask_ctx(id));

  std::vector<BoundSegment> segments(n);
  std::vector<Verdict> verdict(n, Verdict::accept);
  if (plan.predicate) {
    const Predicate& pred = *plan.predicate;
    parallel_for(n, options.threads, [&](std::size_t i) {
      const Interval b = run.bound(*pred.expr, ctx[i]);
      segments[i] = {ctx[i].id, b.lo, b.hi, Decision::pruned};
      verdict[i] = decide(b.lo, b.hi, pred.cmp, pred.threshold);
    });
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < n; ++i) {
      if (verdict[i] == Verdict::unknown) pending.push_back(i);
    }
    std::vector<char> passed(n, 0);
    parallel_for(pending.size(), options.threads, [&](std::size_t j) {
      const std::size_t i = pending[j];
      const Mask mask = run.load(ctx[i]);
      passed[i] = compare(run.exact(*pred.expr, ctx[i], mask), pred.cmp, pred.threshold) ? 1 : 0;
    });
    for (const std::size_t i : pending) {
      segments[i].decision = Decision::verified;
      verdict[i] = passed[i] ? Verdict::accept : Verdict::reject;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (segments[i].decision == Decision::verified) {
      ++result.stats.verified;
    } else if (verdict[i] == Verdict::accept) {
      segments[i] = {ctx[i].id, segments[i].lower, segments[i].upper, Decision::accepted};
      ++result.stats.accepted;
    } else {
      ++result.stats.pruned;
    }
    if (verdict[i] == Verdict::accept) result.rows.push_back({ctx[i].id, std::nullopt});
  }
  finish(result, run, segments);
  return result;
}

QueryResult Engine::eval_topk(const CheckedPlan& checked, const ExecOptions& options) {
  const QueryPlan& plan = checked.plan;
  if (plan.kind != QueryKind::topk || !plan.order || !plan.limit) {
    throw ValidationError("eval_topk needs a top-k plan");
  }
  QueryRun run(catalog_, chi_, source_, options);
  QueryResult result;
  const std::size_t n = checked.candidates.size();
  result.stats.total_candidates = n;

  std::vector<MaskCtx> ctx;
  ctx.reserve(n);
  for (const std::int64_t id : checked.candidates) ctx.push_back(run.mask_ctx(id));

  const Expr& metric = *plan.order->expr;
  std::vector<Candidate> cands(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const Interval b = run.bound(metric, ctx[i]);
    cands[i] = {ctx[i].id, b.lo, b.hi, std::nullopt};
  });
  std::vector<BoundSegment> segments(n);
  for (std::size_t i = 0; i < n; ++i) segments[i] = {cands[i].key, cands[i].lower, cands[i].upper, Decision::pruned};

  const TopKOutcome outcome =
      bounded_topk(cands, static_cast<std::size_t>(*plan.limit), plan.order->descending, [&](std::size_t i) {
        const Mask mask = run.load(ctx[i]);
        return run.exact(metric, ctx[i], mask);
      });
  for (const std::size_t i : outcome.ranked) {
    result.rows.push_back({cands[i].key, cands[i].exact});
    if (!outcome.resolved[i]) segments[i].decision = Decision::accepted;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (outcome.resolved[i]) segments[i].decision = Decision::verified;
    switch (segments[i].decision) {
      case Decision::accepted: ++result.stats.accepted; break;
      case Decision::pruned: ++result.stats.pruned; break;
      case Decision::verified: ++result.stats.verified; break;
    }
  }
  finish(result, run, segments);
  return result;
}

QueryResult Engine::eval_aggregation(const CheckedPlan& checked, const ExecOptions& options) {
  const QueryPlan& plan = checked.plan;
  if (plan.kind != QueryKind::aggregation) throw ValidationError("eval_aggregation needs an aggregation plan");
  QueryRun run(catalog_, chi_, source_, options);
  QueryResult result;
  result.stats.total_candidates = checked.candidates.size();
  result.stats.groups = checked.groups.size();
  result.stats.excluded_groups = checked.excluded_groups.size();

  const std::size_t n = checked.groups.size();
  std::vector<GroupCtx> groups;
  groups.reserve(n);
  for (const auto& g : checked.groups) groups.push_back(run.group_ctx(g));

  const Expr* primary = plan.order ? plan.order->expr.get() : plan.predicate->expr.get();
  std::vector<char> loaded(n, 0);
  std::vector<std::optional<double>> order_exact(n);
  std::vector<BoundSegment> segments(n);
  std::vector<Interval> order_bounds(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const Interval b = run.bound(*primary, groups[i]);
    order_bounds[i] = b;
    segments[i] = {groups[i].image_id, b.lo, b.hi, Decision::pruned};
  });

  auto verify = [&](std::size_t i) -> std::vector<Mask> {
    std::vector<Mask> masks = run.load(groups[i]);
    loaded[i] = 1;
    if (plan.order) order_exact[i] = run.exact(*plan.order->expr, groups[i], masks);
    return masks;
  };

  std::vector<std::size_t> survivors;
  if (plan.predicate) {
    const Predicate& pred = *plan.predicate;
    std::vector<Verdict> verdict(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
      const Interval b = plan.order ? run.bound(*pred.expr, groups[i]) : order_bounds[i];
      verdict[i] = decide(b.lo, b.hi, pred.cmp, pred.threshold);
    });
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < n; ++i) {
      if (verdict[i] == Verdict::unknown) pending.push_back(i);
    }
    std::vector<char> passed(n, 0);
    parallel_for(pending.size(), options.threads, [&](std::size_t j) {
      const std::size_t i = pending[j];
      const std::vector<Mask> masks = verify(i);
      passed[i] = compare(run.exact(*pred.expr, groups[i], masks), pred.cmp, pred.threshold) ? 1 : 0;
    });
    for (const std::size_t i : pending) verdict[i] = passed[i] ? Verdict::accept : Verdict::reject;
    for (std::size_t i = 0; i < n; ++i) {
      if (verdict[i] == Verdict::accept) survivors.push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) survivors.push_back(i);
  }

  std::vector<bool> in_result(n, false);
  if (plan.order) {
    std::vector<Candidate> cands;
    cands.reserve(survivors.size());
    for (const std::size_t i : survivors) {
      cands.push_back({groups[i].image_id, order_bounds[i].lo, order_bounds[i].hi, order_exact[i]});
    }
    const std::size_t k = plan.limit ? static_cast<std::size_t>(*plan.limit) : cands.size();
    const TopKOutcome outcome = bounded_topk(cands, k, plan.order->descending, [&](std::size_t j) {
      verify(survivors[j]);
      return *order_exact[survivors[j]];
    });
    for (const std::size_t j : outcome.ranked) {
      result.rows.push_back({cands[j].key, cands[j].exact});
      in_result[survivors[j]] = true;
    }
  } else {
    for (const std::size_t i : survivors) {
      result.rows.push_back({groups[i].image_id, std::nullopt});
      in_result[i] = true;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t members = groups[i].members.size();
    if (loaded[i]) {
      segments[i].decision = Decision::verified;
      result.stats.verified += members;
    } else if (in_result[i]) {
      segments[i].decision = Decision::accepted;
      result.stats.accepted += members;
    } else {
      result.stats.pruned += members;
    }
  }
  std::size_t grouped = result.stats.accepted + result.stats.pruned + result.stats.verified;
  result.stats.pruned += result.stats.total_candidates - grouped;
  finish(result, run, segments);
  return result;
}

ConfusionMatrix confusion_matrix(const Catalog& catalog, std::optional<std::int64_t> model_id) {
  std::set<std::int64_t> with_model;
  if (model_id) {
    for (const auto& m : catalog.masks()) {
      if (m.model_id == *model_id) with_model.insert(m.image_id);
    }
  }
  ConfusionMatrix out;
  std::set<std::int64_t> labels;
  std::size_t correct = 0;
  for (const auto& img : catalog.images()) {
    if (model_id && !with_model.contains(img.image_id)) continue;
    out.cells[{img.true_label, img.pred_label}].push_back(img.image_id);
    labels.insert(img.true_label);
    labels.insert(img.pred_label);
    ++out.total;
    if (img.true_label == img.pred_label) ++correct;
  }
  for (auto& [_, ids] : out.cells) std::sort(ids.begin(), ids.end());
  out.labels.assign(labels.begin(), labels.end());
  if (out.total > 0) out.accuracy = static_cast<double>(correct) / static_cast<double>(out.total);
  return out;
}

}  // namespace masksearch
