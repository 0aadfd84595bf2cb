#include "masksearch/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "masksearch/error.hpp"

namespace masksearch {

namespace {

double divide(double a, double b) { return b == 0 ? 0.0 : a / b; }

double arith(char op, double a, double b) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    default: return divide(a, b);
  }
}

struct Member {
  const Mask* mask;
  const ImageRecord* image;
};

double eval_mask(const Expr& e, const Member& m) {
  if (const auto* c = std::get_if<Constant>(&e.node)) return c->value;
  if (const auto* a = std::get_if<AreaCall>(&e.node)) {
    return static_cast<double>(resolve_roi(a->roi, m.mask->height(), m.mask->width(), m.image).area());
  }
  if (const auto* cp = std::get_if<CpCall>(&e.node)) {
    const Roi roi = resolve_roi(cp->roi, m.mask->height(), m.mask->width(), m.image);
    return static_cast<double>(cp_exact(*m.mask, roi, cp->range));
  }
  if (const auto* b = std::get_if<BinaryOp>(&e.node)) return arith(b->op, eval_mask(*b->lhs, m), eval_mask(*b->rhs, m));
  throw ValidationError("aggregate in a per-mask expression");
}

double eval_group(const Expr& e, const std::vector<Mask>& masks, const ImageRecord* image) {
  const int h = masks.front().height();
  const int w = masks.front().width();
  if (const auto* c = std::get_if<Constant>(&e.node)) return c->value;
  if (const auto* a = std::get_if<AreaCall>(&e.node)) return static_cast<double>(resolve_roi(a->roi, h, w, image).area());
  if (const auto* cp = std::get_if<CpCall>(&e.node)) {
    std::vector<Mask> binary;
    for (const Mask& m : masks) binary.push_back(threshold_mask(m, cp->target.effective_threshold()));
    const Mask combined = combine_masks(binary, cp->target.op);
    return static_cast<double>(cp_exact(combined, resolve_roi(cp->roi, h, w, image), cp->range));
  }
  if (const auto* agg = std::get_if<AggCall>(&e.node)) {
    std::vector<double> vals;
    for (const Mask& m : masks) vals.push_back(eval_mask(*agg->arg, {&m, image}));
    double sum = 0;
    for (double v : vals) sum += v;
    switch (agg->fn) {
      case ScalarAgg::sum: return sum;
      case ScalarAgg::avg: return sum / static_cast<double>(vals.size());
      case ScalarAgg::min: return *std::min_element(vals.begin(), vals.end());
      case ScalarAgg::max: return *std::max_element(vals.begin(), vals.end());
    }
  }
  const auto& b = std::get<BinaryOp>(e.node);
  return arith(b.op, eval_group(*b.lhs, masks, image), eval_group(*b.rhs, masks, image));
}

void rank(std::vector<ResultRow>& rows, bool descending, std::optional<std::int64_t> limit) {
  std::sort(rows.begin(), rows.end(), [descending](const ResultRow& a, const ResultRow& b) {
    if (*a.value != *b.value) return descending ? *a.value > *b.value : *a.value < *b.value;
    return a.key < b.key;
  });
  if (limit && rows.size() > static_cast<std::size_t>(*limit)) rows.resize(static_cast<std::size_t>(*limit));
}

}  // namespace

QueryResult eval_naive(const CheckedPlan& checked, const MaskSource& source) {
  const auto start = std::chrono::steady_clock::now();
  const QueryPlan& plan = checked.plan;
  const Catalog& catalog = source.catalog();
  QueryResult result;
  result.stats.total_candidates = checked.candidates.size();

  if (plan.kind == QueryKind::aggregation) {
    result.stats.groups = checked.groups.size();
    result.stats.excluded_groups = checked.excluded_groups.size();
    for (const auto& g : checked.groups) {
      std::vector<Mask> masks;
      for (const std::int64_t id : g.members) masks.push_back(source.load(id));
      result.stats.masks_loaded += masks.size();
      const ImageRecord* image = catalog.find_image(g.image_id);
      if (plan.predicate &&
          !compare(eval_group(*plan.predicate->expr, masks, image), plan.predicate->cmp, plan.predicate->threshold)) {
        continue;
      }
      ResultRow row{g.image_id, std::nullopt};
      if (plan.order) row.value = eval_group(*plan.order->expr, masks, image);
      result.rows.push_back(row);
    }
    if (plan.order) rank(result.rows, plan.order->descending, plan.limit);
  } else {
    for (const std::int64_t id : checked.candidates) {
      const Mask mask = source.load(id);
      ++result.stats.masks_loaded;
      const Member m{&mask, catalog.find_image(catalog.find_mask(id)->image_id)};
      if (plan.kind == QueryKind::topk) {
        result.rows.push_back({id, eval_mask(*plan.order->expr, m)});
      } else if (!plan.predicate ||
                 compare(eval_mask(*plan.predicate->expr, m), plan.predicate->cmp, plan.predicate->threshold)) {
        result.rows.push_back({id, std::nullopt});
      }
    }
    if (plan.kind == QueryKind::topk) rank(result.rows, plan.order->descending, plan.limit);
  }
  result.stats.verified = result.stats.total_candidates;
  result.stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  return result;
}

}  // namespace masksearch
