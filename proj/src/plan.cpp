#include "masksearch/plan.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "masksearch/error.hpp"

namespace masksearch {

Roi resolve_roi(const RoiSpec& spec, int height, int width, const ImageRecord* image) {
  switch (spec.kind) {
    case RoiKind::full_img:
      return Roi{0, 0, height, width};
    case RoiKind::constant:
      require_roi_within(spec.rect, height, width);
      return spec.rect;
    case RoiKind::object:
      if (!image || !image->object_roi) {
        throw ValidationError("object roi unavailable for image_id " +
                              (image ? std::to_string(image->image_id) : std::string("<missing image>")));
      }
      require_roi_within(*image->object_roi, height, width);
      return *image->object_roi;
  }
  throw ValidationError("unknown roi kind");
}

ExprPtr make_const(double v) { return std::make_shared<const Expr>(Expr{Constant{v}}); }
ExprPtr make_cp(MaskTarget target, RoiSpec roi, ValueRange range) {
  return std::make_shared<const Expr>(Expr{CpCall{target, roi, range}});
}
ExprPtr make_area(RoiSpec roi) { return std::make_shared<const Expr>(Expr{AreaCall{roi}}); }
ExprPtr make_agg(ScalarAgg fn, ExprPtr arg) {
  return std::make_shared<const Expr>(Expr{AggCall{fn, std::move(arg)}});
}
ExprPtr make_binary(char op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{BinaryOp{op, std::move(lhs), std::move(rhs)}});
}

namespace {

struct EqualVisitor {
  const Expr& other;

  bool operator()(const Constant& a) const {
    const auto* b = std::get_if<Constant>(&other.node);
    return b && a.value == b->value;
  }
  bool operator()(const CpCall& a) const {
    const auto* b = std::get_if<CpCall>(&other.node);
    return b && a.target == b->target && a.roi == b->roi && a.range == b->range;
  }
  bool operator()(const AreaCall& a) const {
    const auto* b = std::get_if<AreaCall>(&other.node);
    return b && a.roi == b->roi;
  }
  bool operator()(const AggCall& a) const {
    const auto* b = std::get_if<AggCall>(&other.node);
    return b && a.fn == b->fn && equal(a.arg, b->arg);
  }
  bool operator()(const BinaryOp& a) const {
    const auto* b = std::get_if<BinaryOp>(&other.node);
    return b && a.op == b->op && equal(a.lhs, b->lhs) && equal(a.rhs, b->rhs);
  }
};

template <typename Pred>
bool any_node(const Expr& e, Pred pred) {
  if (pred(e)) return true;
  if (const auto* agg = std::get_if<AggCall>(&e.node)) return any_node(*agg->arg, pred);
  if (const auto* bin = std::get_if<BinaryOp>(&e.node)) return any_node(*bin->lhs, pred) || any_node(*bin->rhs, pred);
  return false;
}

bool equal_opt(const std::optional<Predicate>& a, const std::optional<Predicate>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->cmp == b->cmp && a->threshold == b->threshold && equal(a->expr, b->expr));
}

bool equal_opt(const std::optional<Order>& a, const std::optional<Order>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->descending == b->descending && equal(a->expr, b->expr));
}

std::vector<const Expr*> plan_exprs(const QueryPlan& plan) {
  std::vector<const Expr*> out;
  if (plan.metric) out.push_back(plan.metric.get());
  if (plan.predicate) out.push_back(plan.predicate->expr.get());
  if (plan.order) out.push_back(plan.order->expr.get());
  return out;
}

std::string join_ids(const std::vector<std::int64_t>& ids, std::size_t cap = 20) {
  std::string s;
  for (std::size_t i = 0; i < ids.size() && i < cap; ++i) {
    if (i) s += ", ";
    s += std::to_string(ids[i]);
  }
  if (ids.size() > cap) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

}  // namespace

bool equal(const Expr& a, const Expr& b) { return std::visit(EqualVisitor{b}, a.node); }

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return equal(*a, *b);
}

bool uses_object_roi(const Expr& e) {
  return any_node(e, [](const Expr& n) {
    if (const auto* cp = std::get_if<CpCall>(&n.node)) return cp->roi.kind == RoiKind::object;
    if (const auto* ar = std::get_if<AreaCall>(&n.node)) return ar->roi.kind == RoiKind::object;
    return false;
  });
}

bool uses_mask_agg(const Expr& e) {
  return any_node(e, [](const Expr& n) {
    const auto* cp = std::get_if<CpCall>(&n.node);
    return cp && cp->target.aggregated;
  });
}

void collect_rois(const Expr& e, std::vector<RoiSpec>& out) {
  any_node(e, [&out](const Expr& n) {
    if (const auto* cp = std::get_if<CpCall>(&n.node)) out.push_back(cp->roi);
    if (const auto* ar = std::get_if<AreaCall>(&n.node)) out.push_back(ar->roi);
    return false;
  });
}

bool compare(double value, Comparator cmp, double threshold) {
  switch (cmp) {
    case Comparator::lt: return value < threshold;
    case Comparator::le: return value <= threshold;
    case Comparator::gt: return value > threshold;
    case Comparator::ge: return value >= threshold;
  }
  return false;
}

bool operator==(const QueryPlan& a, const QueryPlan& b) {
  return a.kind == b.kind && a.select == b.select && equal(a.metric, b.metric) &&
         a.metric_alias == b.metric_alias && a.model_id == b.model_id && a.mask_types == b.mask_types &&
         equal_opt(a.predicate, b.predicate) && equal_opt(a.order, b.order) && a.limit == b.limit &&
         a.group_by_image == b.group_by_image;
}

CheckedPlan validate(const QueryPlan& plan, const Catalog& catalog) {
  if (plan.kind == QueryKind::topk && (!plan.order || !plan.limit)) {
    throw ValidationError("top-k plan needs ORDER BY and LIMIT");
  }
  if ((plan.kind == QueryKind::aggregation) != plan.group_by_image) {
    throw ValidationError("aggregation plans (and only those) group by image_id");
  }
  if (plan.limit && *plan.limit <= 0) throw ValidationError("LIMIT must be positive");

  bool needs_mask_agg = false;
  std::vector<RoiSpec> rois;
  for (const Expr* e : plan_exprs(plan)) {
    needs_mask_agg = needs_mask_agg || uses_mask_agg(*e);
    collect_rois(*e, rois);
  }
  if (needs_mask_agg && plan.mask_types.empty()) {
    throw ValidationError("MASK_AGG requires a non-empty mask_type IN (...) list");
  }

  CheckedPlan out;
  out.plan = plan;
  const std::set<std::int64_t> types(plan.mask_types.begin(), plan.mask_types.end());
  for (const auto& rec : catalog.masks()) {
    if (plan.model_id && rec.model_id != *plan.model_id) continue;
    if (!types.empty() && !types.contains(rec.mask_type)) continue;
    out.candidates.push_back(rec.mask_id);
  }
  std::sort(out.candidates.begin(), out.candidates.end());

  std::vector<std::int64_t> missing_object;
  for (const std::int64_t id : out.candidates) {
    const MaskRecord& rec = *catalog.find_mask(id);
    const auto [h, w] = catalog.mask_dims(rec);
    const ImageRecord* image = catalog.find_image(rec.image_id);
    for (const RoiSpec& spec : rois) {
      if (spec.kind == RoiKind::constant && !spec.rect.valid_for(h, w)) {
        throw ValidationError("roi " + to_string(spec.rect) + " exceeds dimensions " + std::to_string(h) +
                              "x" + std::to_string(w) + " of mask_id " + std::to_string(id));
      }
      if (spec.kind == RoiKind::object) {
        if (!image || !image->object_roi) {
          missing_object.push_back(rec.image_id);
        } else if (!image->object_roi->valid_for(h, w)) {
          throw ValidationError("object roi of image_id " + std::to_string(rec.image_id) +
                                " exceeds dimensions of mask_id " + std::to_string(id));
        }
      }
    }
  }
  if (!missing_object.empty()) {
    std::sort(missing_object.begin(), missing_object.end());
    missing_object.erase(std::unique(missing_object.begin(), missing_object.end()), missing_object.end());
    throw ValidationError("object roi unavailable for image_ids: " + join_ids(missing_object));
  }

  if (plan.group_by_image) {
    std::map<std::int64_t, std::vector<std::int64_t>> by_image;
    for (const std::int64_t id : out.candidates) by_image[catalog.find_mask(id)->image_id].push_back(id);
    for (auto& [image_id, members] : by_image) {
      std::set<std::int64_t> present;
      for (const std::int64_t id : members) present.insert(catalog.find_mask(id)->mask_type);
      if (!std::includes(present.begin(), present.end(), types.begin(), types.end())) {
        out.excluded_groups.push_back(image_id);
        continue;
      }
      if (needs_mask_agg) {
        const auto dims = catalog.mask_dims(*catalog.find_mask(members.front()));
        for (const std::int64_t id : members) {
          if (catalog.mask_dims(*catalog.find_mask(id)) != dims) {
            throw ValidationError("masks of image_id " + std::to_string(image_id) +
                                  " differ in size; MASK_AGG needs equal dimensions");
          }
        }
      }
      out.groups.push_back({image_id, std::move(members)});
    }
  }
  return out;
}

}  // namespace masksearch
