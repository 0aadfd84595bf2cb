#pragma once

#include "masksearch/engine.hpp"

namespace masksearch {

/// Reference evaluator: loads every candidate mask and computes each metric
/// directly from pixels, then sorts. Used to check the engine.
QueryResult eval_naive(const CheckedPlan& plan, const MaskSource& source);

}  // namespace masksearch
