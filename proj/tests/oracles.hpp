#pragma once

// Test-only reference implementations. Nothing here calls into the code
// paths they check: dense loops instead of sparse operators and Eigen.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "fedgnn/backdoor.hpp"
#include "fedgnn/gnn.hpp"
#include "fedgnn/graph.hpp"

namespace oracle {

// Extended precision keeps finite-difference round-off well below the
// tolerances the gradient checks use.
using Real = long double;
using Dense = std::vector<std::vector<Real>>;

inline std::uint64_t brute_force_triangles(const fedgnn::Graph& g) {
  const std::size_t n = g.n_nodes();
  std::vector<std::vector<bool>> a(n, std::vector<bool>(n, false));
  for (const auto& [u, v] : g.edges()) a[u][v] = a[v][u] = true;
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        count += a[i][j] && a[j][k] && a[i][k];
  return count;
}

inline Dense zeros(std::size_t r, std::size_t c) {
  return Dense(r, std::vector<Real>(c, 0.0L));
}

inline Dense matmul(const Dense& a, const Dense& b) {
  Dense out = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < out[i].size(); ++j)
        out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline Dense dense_adjacency(const fedgnn::Graph& g) {
  Dense a = zeros(g.n_nodes(), g.n_nodes());
  for (const auto& [u, v] : g.edges()) a[u][v] = a[v][u] = 1.0L;
  return a;
}

inline Dense gcn_operator(const fedgnn::Graph& g) {
  Dense a = dense_adjacency(g);
  const std::size_t n = a.size();
  std::vector<Real> deg(n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0L;
    for (Real x : a[i]) deg[i] += x;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] /= std::sqrt(deg[i] * deg[j]);
  return a;
}

inline Dense mean_operator(const fedgnn::Graph& g) {
  Dense a = dense_adjacency(g);
  for (std::size_t i = 0; i < a.size(); ++i) {
    Real d = 0.0L;
    for (Real x : a[i]) d += x;
    if (d == 0.0L) {
      a[i][i] = 1.0L;
      continue;
    }
    for (Real& x : a[i]) x /= d;
  }
  return a;
}

inline Dense segment(std::span<const double> values,
                     const fedgnn::ParamLayout& layout, std::size_t index) {
  const auto& seg = layout.segments()[index];
  const std::size_t off = layout.offset(index);
  Dense m = zeros(seg.rows, seg.cols);
  for (std::size_t i = 0; i < seg.rows; ++i)
    for (std::size_t j = 0; j < seg.cols; ++j)
      m[i][j] = values[off + i * seg.cols + j];
  return m;
}

inline std::vector<Real> reference_logits_ext(const fedgnn::ModelSpec& spec,
                                              const fedgnn::ParamLayout& layout,
                                              std::span<const double> p,
                                              const fedgnn::Graph& g) {
  const std::size_t n = g.n_nodes();
  Dense h = zeros(n, g.feature_dim());
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t k = 0; k < g.feature_dim(); ++k)
      h[v][k] = g.features()[v * g.feature_dim() + k];
  const bool gcn = spec.kind == fedgnn::ModelKind::kGcn;
  const Dense op = gcn ? gcn_operator(g) : mean_operator(g);
  const std::size_t L = spec.n_layers();
  for (std::size_t l = 0; l < L; ++l) {
    Dense mixed;
    if (gcn) {
      mixed = matmul(op, h);
    } else {
      const Dense nb = matmul(op, h);
      mixed = h;
      for (std::size_t v = 0; v < n; ++v)
        mixed[v].insert(mixed[v].end(), nb[v].begin(), nb[v].end());
    }
    h = matmul(mixed, segment(p, layout, l));
    for (auto& row : h)
      for (Real& x : row) x = std::max(0.0L, x);
  }
  const std::size_t width = spec.layer_dims.back();
  std::vector<Real> pooled(width, 0.0L);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t k = 0; k < width; ++k) pooled[k] += h[v][k];
  if (spec.readout == fedgnn::Readout::kMean && n > 0)
    for (Real& x : pooled) x /= static_cast<Real>(n);
  const Dense w = segment(p, layout, L);
  const Dense b = segment(p, layout, L + 1);
  std::vector<Real> z(spec.n_classes, 0.0L);
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    z[c] = b[0][c];
    for (std::size_t k = 0; k < width; ++k) z[c] += pooled[k] * w[k][c];
  }
  return z;
}

inline std::vector<double> reference_logits(const fedgnn::ModelSpec& spec,
                                            const fedgnn::ParamVector& p,
                                            const fedgnn::Graph& g) {
  const auto z = reference_logits_ext(spec, *p.layout(), p.values(), g);
  return {z.begin(), z.end()};
}

inline Real reference_loss_ext(const fedgnn::ModelSpec& spec,
                               const fedgnn::ParamLayout& layout,
                               std::span<const double> p,
                               const std::vector<fedgnn::Graph>& batch) {
  Real total = 0.0L;
  for (const auto& g : batch) {
    const auto z = reference_logits_ext(spec, layout, p, g);
    const Real m = *std::max_element(z.begin(), z.end());
    Real s = 0.0L;
    for (Real x : z) s += std::exp(x - m);
    total += std::log(s) + m - z[g.label()];
  }
  return total / static_cast<Real>(batch.size());
}

inline double reference_loss(const fedgnn::ModelSpec& spec,
                             const fedgnn::ParamVector& p,
                             const std::vector<fedgnn::Graph>& batch) {
  return static_cast<double>(
      reference_loss_ext(spec, *p.layout(), p.values(), batch));
}

// Central differences of reference_loss for every coordinate.
inline std::vector<double> finite_difference_grad(
    const fedgnn::ModelSpec& spec, const fedgnn::ParamVector& p,
    const std::vector<fedgnn::Graph>& batch, double eps) {
  std::vector<double> vals(p.values().begin(), p.values().end());
  std::vector<double> grad(vals.size());
  const auto& layout = *p.layout();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double orig = vals[i];
    const double hi = orig + eps;
    const double lo = orig - eps;
    vals[i] = hi;
    const Real up = reference_loss_ext(spec, layout, vals, batch);
    vals[i] = lo;
    const Real down = reference_loss_ext(spec, layout, vals, batch);
    vals[i] = orig;
    grad[i] = static_cast<double>((up - down) / (static_cast<Real>(hi) - lo));
  }
  return grad;
}

inline double max_relative_error(std::span<const double> a,
                                 std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), 1e-6});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

// Random undirected graph with real-valued features.
inline fedgnn::Graph random_graph(std::mt19937_64& rng, std::size_t n,
                                  double p, std::size_t dim, int n_classes) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<fedgnn::Edge> edges;
  for (fedgnn::NodeId a = 0; a < n; ++a)
    for (fedgnn::NodeId b = a + 1; b < n; ++b)
      if (u01(rng) < p) edges.emplace_back(a, b);
  std::vector<double> f(n * dim);
  for (double& x : f) x = normal(rng);
  const int label = static_cast<int>(rng() % static_cast<std::uint64_t>(n_classes));
  return fedgnn::Graph(n, std::move(edges), std::move(f), dim, label);
}

// Structural graph with degree one-hot features.
inline fedgnn::Graph random_er(std::mt19937_64& rng, std::size_t n, double p,
                               int label = 0) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<fedgnn::Edge> edges;
  for (fedgnn::NodeId a = 0; a < n; ++a)
    for (fedgnn::NodeId b = a + 1; b < n; ++b)
      if (u01(rng) < p) edges.emplace_back(a, b);
  fedgnn::Graph g(n, std::move(edges), {}, 0, label);
  return g.with_features(fedgnn::degree_one_hot(g), fedgnn::kDegreeFeatureDim);
}

// Violations of the injection post-conditions: the sampled nodes are
// distinct, the induced subgraph on them equals the trigger under the
// sampling order, every other edge is preserved, and nothing else changes.
inline std::size_t injection_violations(const fedgnn::Graph& before,
                                        const fedgnn::TriggerGraph& t,
                                        const fedgnn::Injection& inj) {
  std::size_t bad = 0;
  const auto& after = inj.graph;
  const auto& s = inj.sampled;
  bad += after.n_nodes() != before.n_nodes();
  bad += after.features() != before.features();
  bad += after.label() != before.label();
  bad += s.size() != t.n_nodes;
  std::set<fedgnn::NodeId> in_sample(s.begin(), s.end());
  bad += in_sample.size() != s.size();
  if (bad) return bad;
  std::set<std::pair<fedgnn::NodeId, fedgnn::NodeId>> trig(t.edges.begin(),
                                                           t.edges.end());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      bad += after.has_edge(s[i], s[j]) !=
             (trig.count({static_cast<fedgnn::NodeId>(i),
                          static_cast<fedgnn::NodeId>(j)}) > 0);
  for (const auto& [u, v] : before.edges())
    if (!(in_sample.count(u) && in_sample.count(v))) bad += !after.has_edge(u, v);
  for (const auto& [u, v] : after.edges())
    if (!(in_sample.count(u) && in_sample.count(v))) bad += !before.has_edge(u, v);
  return bad;
}

// Whether some injective node map realises `t` as an induced subgraph of
// `g`. Plain backtracking; meant for small triggers.
inline bool contains_induced(const fedgnn::Graph& g, const fedgnn::TriggerGraph& t) {
  const std::size_t s = t.n_nodes;
  std::vector<std::vector<bool>> te(s, std::vector<bool>(s, false));
  for (const auto& [u, v] : t.edges) te[u][v] = te[v][u] = true;
  std::vector<fedgnn::NodeId> map;
  std::vector<bool> used(g.n_nodes(), false);
  auto extend = [&](auto&& self) -> bool {
    if (map.size() == s) return true;
    const std::size_t i = map.size();
    for (fedgnn::NodeId v = 0; v < g.n_nodes(); ++v) {
      if (used[v]) continue;
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) ok = g.has_edge(map[j], v) == te[j][i];
      if (!ok) continue;
      used[v] = true;
      map.push_back(v);
      if (self(self)) return true;
      map.pop_back();
      used[v] = false;
    }
    return false;
  };
  return extend(extend);
}

// sum_i w_i p_i / sum_i w_i, one coordinate at a time.
inline std::vector<double> naive_weighted_mean(
    const std::vector<fedgnn::ParamVector>& ps, const std::vector<double>& w) {
  std::vector<double> out(ps.front().size(), 0.0);
  double total = 0.0;
  for (double x : w) total += x;
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) acc += w[i] * ps[i][j];
    out[j] = acc / total;
  }
  return out;
}

// Two-pass Pearson correlation in extended precision.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  Real mx = 0.0L, my = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  Real sxy = 0.0L, sxx = 0.0L, syy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

}  // namespace oracle
