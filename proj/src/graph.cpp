#include "fedgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedgnn/errors.hpp"
#include "fedgnn/rng.hpp"

namespace fedgnn {

Graph::Graph(std::size_t n_nodes, std::vector<Edge> edges,
             std::vector<double> features, std::size_t feature_dim, int label)
    : n_nodes_(n_nodes),
      edges_(std::move(edges)),
      features_(std::move(features)),
      feature_dim_(feature_dim),
      label_(label) {
  for (auto& [u, v] : edges_) {
    if (u == v) throw ContractError("self-loop on node " + std::to_string(u));
    if (u >= n_nodes_ || v >= n_nodes_)
      throw ContractError("edge (" + std::to_string(u) + "," +
                          std::to_string(v) + ") outside " +
                          std::to_string(n_nodes_) + " nodes");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  if (features_.size() != n_nodes_ * feature_dim_)
    throw ContractError("feature matrix has " +
                        std::to_string(features_.size()) + " values, expected " +
                        std::to_string(n_nodes_) + "x" +
                        std::to_string(feature_dim_));
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(n_nodes_, 0);
  for (const auto& [u, v] : edges_) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

std::vector<std::vector<NodeId>> Graph::adjacency_lists() const {
  std::vector<std::vector<NodeId>> adj(n_nodes_);
  for (const auto& [u, v] : edges_) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

Graph Graph::with_label(int label) const {
  Graph g = *this;
  g.label_ = label;
  return g;
}

Graph Graph::with_edges(std::vector<Edge> edges) const {
  return Graph(n_nodes_, std::move(edges), features_, feature_dim_, label_);
}

Graph Graph::with_features(std::vector<double> features,
                           std::size_t dim) const {
  return Graph(n_nodes_, edges_, std::move(features), dim, label_);
}

void GraphDataset::validate() const {
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const Graph& g = graphs[i];
    if (g.feature_dim() != feature_dim)
      throw ContractError("graph " + std::to_string(i) + " has feature_dim " +
                          std::to_string(g.feature_dim()) + ", dataset has " +
                          std::to_string(feature_dim));
    if (g.label() < 0 || static_cast<std::size_t>(g.label()) >= n_classes)
      throw ContractError("graph " + std::to_string(i) + " label " +
                          std::to_string(g.label()) + " outside [0," +
                          std::to_string(n_classes) + ")");
  }
}

std::vector<int> GraphDataset::labels() const {
  std::vector<int> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(g.label());
  return out;
}

std::vector<double> degree_one_hot(const Graph& g, std::size_t dim) {
  std::vector<double> f(g.n_nodes() * dim, 0.0);
  const auto deg = g.degrees();
  for (std::size_t v = 0; v < g.n_nodes(); ++v)
    f[v * dim + std::min(deg[v], dim - 1)] = 1.0;
  return f;
}

std::uint64_t count_triangles(const Graph& g) {
  // Forward adjacency: neighbors with a larger id, sorted.
  std::vector<std::vector<NodeId>> fwd(g.n_nodes());
  for (const auto& [u, v] : g.edges()) fwd[u].push_back(v);
  std::uint64_t count = 0;
  for (const auto& [u, v] : g.edges()) {
    const auto& a = fwd[u];
    const auto& b = fwd[v];
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        ++count;
        ++i;
        ++j;
      }
    }
  }
  return count;
}

GraphDataset generate_triangles_dataset(std::size_t n_graphs,
                                        std::size_t node_lo,
                                        std::size_t node_hi,
                                        std::uint64_t seed) {
  if (n_graphs == 0 || n_graphs % kTriangleClasses != 0)
    throw ConfigError("n_graphs must be a positive multiple of 10, got " +
                      std::to_string(n_graphs));
  if (node_lo < 5 || node_hi < node_lo)
    throw ConfigError("node range must satisfy 5 <= lo <= hi, got [" +
                      std::to_string(node_lo) + "," + std::to_string(node_hi) +
                      "]");
  const std::size_t per_class = n_graphs / kTriangleClasses;
  const std::size_t max_attempts = 200 * n_graphs + 10000;

  Rng rng = make_rng(derive_seed(seed, Stream::kGenerator));
  std::vector<std::vector<Graph>> buckets(kTriangleClasses);
  std::size_t target = 0;
  std::size_t filled = 0;
  for (std::size_t attempt = 0; attempt < max_attempts && filled < n_graphs;
       ++attempt) {
    while (buckets[target].size() == per_class)
      target = (target + 1) % kTriangleClasses;
    const std::size_t n = node_lo + uniform_below(rng, node_hi - node_lo + 1);
    // Edge probability whose expected triangle count C(n,3) p^3 equals the
    // target count.
    const double triples = static_cast<double>(n * (n - 1) * (n - 2)) / 6.0;
    const double p = std::min(
        1.0, std::cbrt(static_cast<double>(target + 1) / triples));
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (bernoulli(rng, p)) edges.emplace_back(u, v);
    Graph g(n, std::move(edges), {}, 0, 0);
    const std::uint64_t t = count_triangles(g);
    target = (target + 1) % kTriangleClasses;
    if (t < 1 || t > kTriangleClasses) continue;
    auto& bucket = buckets[t - 1];
    if (bucket.size() == per_class) continue;
    bucket.push_back(
        g.with_features(degree_one_hot(g), kDegreeFeatureDim)
            .with_label(static_cast<int>(t - 1)));
    ++filled;
  }
  if (filled < n_graphs) {
    std::size_t starving = 0;
    for (std::size_t c = 1; c < kTriangleClasses; ++c)
      if (buckets[c].size() < buckets[starving].size()) starving = c;
    throw GenerationError("class " + std::to_string(starving) + " (" +
                          std::to_string(starving + 1) + " triangles) has " +
                          std::to_string(buckets[starving].size()) + "/" +
                          std::to_string(per_class) + " graphs after " +
                          std::to_string(max_attempts) + " attempts");
  }

  // Interleave classes so the dataset order carries no label blocks.
  GraphDataset ds;
  ds.n_classes = kTriangleClasses;
  ds.feature_dim = kDegreeFeatureDim;
  ds.graphs.reserve(n_graphs);
  for (std::size_t i = 0; i < per_class; ++i)
    for (auto& bucket : buckets) ds.graphs.push_back(std::move(bucket[i]));
  return ds;
}

TrainTestSplit train_test_split(std::size_t n, double train_frac,
                                std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ConfigError("train_frac must lie in (0,1), got " +
                      std::to_string(train_frac));
  IndexSet perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(derive_seed(seed, Stream::kSplit));
  for (std::size_t i = n; i > 1; --i)
    std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
  TrainTestSplit split;
  split.train.assign(perm.begin(), perm.begin() + n_train);
  split.test.assign(perm.begin() + n_train, perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

ClientPartition noniid_label_split(std::span<const std::size_t> train,
                                   std::span<const int> labels, std::size_t K,
                                   double q, std::uint64_t seed) {
  if (K < 2) throw ConfigError("non-iid split needs K >= 2");
  const double q_min = 1.0 / static_cast<double>(K);
  if (!(q >= q_min - 1e-12 && q <= 1.0))
    throw ConfigError("non-iid q must lie in [1/K, 1] = [" +
                      std::to_string(q_min) + ", 1], got " + std::to_string(q));
  Rng rng = make_rng(derive_seed(seed, Stream::kPartition));
  ClientPartition part;
  part.parts.resize(K);
  for (std::size_t idx : train) {
    const auto home = static_cast<std::size_t>(labels[idx]) % K;
    std::size_t client = home;
    if (!bernoulli(rng, q)) {
      client = uniform_below(rng, K - 1);
      if (client >= home) ++client;
    }
    part.parts[client].push_back(idx);
  }
  return part;
}

double avg_node_count(std::span<const Graph> graphs) {
  if (graphs.empty())
    throw ContractError("average node count of an empty dataset");
  double total = 0.0;
  for (const auto& g : graphs) total += static_cast<double>(g.n_nodes());
  return total / static_cast<double>(graphs.size());
}

std::size_t standardize_attributes(GraphDataset& ds,
                                   std::span<const std::size_t> fit_on) {
  const std::size_t d = ds.feature_dim;
  const std::size_t first = d - ds.n_attribute_dims;
  std::size_t changed = 0;
  for (std::size_t col = first; col < d; ++col) {
    bool binary = true;
    double sum = 0.0, sum_sq = 0.0, count = 0.0;
    for (std::size_t gi : fit_on) {
      const Graph& g = ds.graphs[gi];
      for (std::size_t v = 0; v < g.n_nodes(); ++v) {
        const double x = g.features()[v * d + col];
        binary = binary && (x == 0.0 || x == 1.0);
        sum += x;
        sum_sq += x * x;
        count += 1.0;
      }
    }
    if (binary || count == 0.0) continue;
    const double mean = sum / count;
    const double var = std::max(0.0, sum_sq / count - mean * mean);
    const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (auto& g : ds.graphs) {
      std::vector<double> f = g.features();
      for (std::size_t v = 0; v < g.n_nodes(); ++v)
        f[v * d + col] = (f[v * d + col] - mean) * scale;
      g = g.with_features(std::move(f), d);
    }
    ++changed;
  }
  return changed;
}

}  // namespace fedgnn
