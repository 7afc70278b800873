#pragma once

#include <span>

#include "fedgnn/backdoor.hpp"
#include "fedgnn/gnn.hpp"

namespace fedgnn {

// Fraction of triggered graphs predicted as the target label. Ties in the
// logits go to the lowest class index.
double attack_success_rate(const ModelSpec& spec, const ParamVector& params,
                           const EvalSet& eval, std::size_t threads = 1);

double clean_accuracy(const ModelSpec& spec, const ParamVector& params,
                      std::span<const Graph> test, std::size_t threads = 1);

// Pearson correlation; throws MetricError on length mismatch, fewer than
// two points or a constant series.
double pearson_cc(std::span<const double> xs, std::span<const double> ys);

}  // namespace fedgnn
