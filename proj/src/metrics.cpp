#include "fedgnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedgnn/errors.hpp"
#include "fedgnn/parallel.hpp"

namespace fedgnn {
namespace {

std::vector<int> predictions(const ModelSpec& spec, const ParamVector& params,
                             std::span<const Graph> graphs,
                             std::size_t threads) {
  std::vector<int> out(graphs.size());
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (graphs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(graphs.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i)
      out[i] = predict(spec, params, graphs[i]);
  });
  return out;
}

}  // namespace

double attack_success_rate(const ModelSpec& spec, const ParamVector& params,
                           const EvalSet& eval, std::size_t threads) {
  if (eval.graphs.empty()) throw EvaluationError("empty attack evaluation set");
  std::size_t hits = 0;
  for (int p : predictions(spec, params, eval.graphs, threads))
    hits += p == eval.target_label;
  return static_cast<double>(hits) / static_cast<double>(eval.graphs.size());
}

double clean_accuracy(const ModelSpec& spec, const ParamVector& params,
                      std::span<const Graph> test, std::size_t threads) {
  if (test.empty()) throw EvaluationError("empty clean test set");
  const auto pred = predictions(spec, params, test, threads);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) hits += pred[i] == test[i].label();
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

double pearson_cc(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw MetricError("pearson_cc: series lengths differ");
  if (xs.size() < 2) throw MetricError("pearson_cc: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw MetricError("pearson_cc: undefined correlation (zero variance)");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace fedgnn
