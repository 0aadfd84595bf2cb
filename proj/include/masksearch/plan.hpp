#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "masksearch/catalog.hpp"
#include "masksearch/mask.hpp"

namespace masksearch {

enum class RoiKind { constant, object, full_img };

struct RoiSpec {
  RoiKind kind = RoiKind::full_img;
  Roi rect{};  // used when kind == constant

  static RoiSpec constant(Roi r) { return {RoiKind::constant, r}; }
  static RoiSpec object() { return {RoiKind::object, {}}; }
  static RoiSpec full() { return {RoiKind::full_img, {}}; }

  friend bool operator==(const RoiSpec&, const RoiSpec&) = default;
};

/// Resolves a roi spec for one mask; `image` may be null. Throws
/// ValidationError when an object roi is unavailable or out of bounds.
Roi resolve_roi(const RoiSpec& spec, int height, int width, const ImageRecord* image);

/// `mask`, or `intersect(mask > t)` / `union(mask > t)` over a group.
struct MaskTarget {
  bool aggregated = false;
  CombineOp op = CombineOp::intersect;
  std::optional<double> threshold;  // binarization cut; 0.5 when absent

  [[nodiscard]] double effective_threshold() const { return threshold.value_or(0.5); }

  friend bool operator==(const MaskTarget&, const MaskTarget&) = default;
};

enum class ScalarAgg { sum, avg, min, max };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Constant {
  double value;
};
struct CpCall {
  MaskTarget target;
  RoiSpec roi;
  ValueRange range;
};
struct AreaCall {
  RoiSpec roi;
};
struct AggCall {
  ScalarAgg fn;
  ExprPtr arg;
};
struct BinaryOp {
  char op;  // one of + - * /
  ExprPtr lhs;
  ExprPtr rhs;
};

/// CP arithmetic. Division by zero evaluates to 0.
struct Expr {
  std::variant<Constant, CpCall, AreaCall, AggCall, BinaryOp> node;
};

ExprPtr make_const(double v);
ExprPtr make_cp(MaskTarget target, RoiSpec roi, ValueRange range);
ExprPtr make_area(RoiSpec roi);
ExprPtr make_agg(ScalarAgg fn, ExprPtr arg);
ExprPtr make_binary(char op, ExprPtr lhs, ExprPtr rhs);

bool equal(const Expr& a, const Expr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);

/// True if the expression (transitively) contains a node satisfying pred.
bool uses_object_roi(const Expr& e);
bool uses_mask_agg(const Expr& e);
void collect_rois(const Expr& e, std::vector<RoiSpec>& out);

enum class QueryKind { filter, topk, aggregation };
enum class SelectKey { mask_id, image_id };
enum class Comparator { lt, le, gt, ge };

[[nodiscard]] bool compare(double value, Comparator cmp, double threshold);

struct Predicate {
  ExprPtr expr;
  Comparator cmp = Comparator::gt;
  double threshold = 0;
};

struct Order {
  ExprPtr expr;
  bool descending = false;
};

struct QueryPlan {
  QueryKind kind = QueryKind::filter;
  SelectKey select = SelectKey::mask_id;
  // `SELECT key, <metric> AS <alias>`
  ExprPtr metric;
  std::string metric_alias;
  std::optional<std::int64_t> model_id;
  std::vector<std::int64_t> mask_types;  // empty: no restriction
  // WHERE predicate (per mask) or HAVING predicate (per group)
  std::optional<Predicate> predicate;
  std::optional<Order> order;
  std::optional<std::int64_t> limit;
  bool group_by_image = false;
};

bool operator==(const QueryPlan& a, const QueryPlan& b);

/// A plan checked against a catalog, with its candidate masks resolved.
struct CheckedPlan {
  QueryPlan plan;
  std::vector<std::int64_t> candidates;  // mask ids, ascending
  struct Group {
    std::int64_t image_id;
    std::vector<std::int64_t> members;  // mask ids, ascending
  };
  std::vector<Group> groups;             // aggregation only, by image_id
  std::vector<std::int64_t> excluded_groups;  // images missing a listed mask_type
};

/// Checks roi availability and dimensions for every candidate; throws
/// ValidationError.
CheckedPlan validate(const QueryPlan& plan, const Catalog& catalog);

}  // namespace masksearch
