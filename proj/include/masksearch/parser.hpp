#pragma once

#include <map>
#include <string>
#include <string_view>

#include "masksearch/plan.hpp"

namespace masksearch {

/// Placeholder name -> replacement text. An identifier equal to a key is
/// replaced by the tokens of its value, e.g. {"roi", "((50, 50), (200, 200))"}
/// or {"T", "5000"}. A binding whose value is a call (contains '(') also
/// consumes a following `(mask)`, so {"MASK_AGG", "intersect(mask > 0.8)"}
/// turns `MASK_AGG(mask)` into `intersect(mask > 0.8)`.
using Bindings = std::map<std::string, std::string, std::less<>>;

/// Parses one statement of the MasksDatabaseView dialect (grammar in
/// docs/dialect.md). Throws ParseError carrying line and column.
QueryPlan parse(std::string_view sql, const Bindings& bindings = {});

/// Canonical text; parse(render(p)) == p.
std::string render(const QueryPlan& plan);
std::string render(const Expr& expr);

std::string_view to_string(QueryKind kind);
std::string_view to_string(Comparator cmp);
std::string_view to_string(ScalarAgg fn);

}  // namespace masksearch
