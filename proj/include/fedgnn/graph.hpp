#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace fedgnn {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// One labeled, attributed, undirected graph. Edges are kept sorted with
// u < v and no duplicates; features are row-major n_nodes x feature_dim.
class Graph {
 public:
  Graph() = default;

  // Normalizes `edges` (orders endpoints, sorts, deduplicates) and validates
  // endpoints and the feature matrix shape. Self-loops are rejected.
  Graph(std::size_t n_nodes, std::vector<Edge> edges,
        std::vector<double> features, std::size_t feature_dim, int label);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  int label() const noexcept { return label_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& features() const noexcept { return features_; }
  std::span<const double> feature_row(std::size_t v) const {
    return {features_.data() + v * feature_dim_, feature_dim_};
  }

  bool has_edge(NodeId u, NodeId v) const;
  std::vector<std::size_t> degrees() const;
  std::vector<std::vector<NodeId>> adjacency_lists() const;

  Graph with_label(int label) const;
  Graph with_edges(std::vector<Edge> edges) const;
  Graph with_features(std::vector<double> features, std::size_t dim) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> features_;
  std::size_t feature_dim_ = 0;
  int label_ = 0;
};

struct GraphDataset {
  std::vector<Graph> graphs;
  std::size_t n_classes = 0;
  std::size_t feature_dim = 0;
  // Trailing feature columns that came from raw continuous node attributes
  // (as opposed to one-hot encodings).
  std::size_t n_attribute_dims = 0;

  std::size_t size() const noexcept { return graphs.size(); }
  // Checks shared feature_dim and label range; throws ContractError.
  void validate() const;
  std::vector<int> labels() const;

  // Content equality; n_attribute_dims is provenance metadata and ignored.
  friend bool operator==(const GraphDataset& a, const GraphDataset& b) {
    return a.n_classes == b.n_classes && a.feature_dim == b.feature_dim &&
           a.graphs == b.graphs;
  }
};

using IndexSet = std::vector<std::size_t>;

// K disjoint index lists into a parent dataset.
struct ClientPartition {
  std::vector<IndexSet> parts;

  std::size_t n_clients() const noexcept { return parts.size(); }
};

struct TrainTestSplit {
  IndexSet train;
  IndexSet test;
};

// Degree one-hot features with degrees >= dim folded into the last column.
constexpr std::size_t kDegreeFeatureDim = 16;
std::vector<double> degree_one_hot(const Graph& g,
                                   std::size_t dim = kDegreeFeatureDim);

// Number of 3-cycles, via sorted adjacency intersection over oriented edges.
std::uint64_t count_triangles(const Graph& g);

// Balanced synthetic triangle-counting dataset: class c holds graphs with
// exactly c+1 triangles, c in [0,10). n_graphs must be a multiple of 10 and
// node_lo >= 5.
GraphDataset generate_triangles_dataset(std::size_t n_graphs,
                                        std::size_t node_lo,
                                        std::size_t node_hi,
                                        std::uint64_t seed);
inline constexpr std::size_t kTriangleClasses = 10;

TrainTestSplit train_test_split(std::size_t n, double train_frac,
                                std::uint64_t seed);
inline TrainTestSplit train_test_split(const GraphDataset& ds,
                                       double train_frac, std::uint64_t seed) {
  return train_test_split(ds.size(), train_frac, seed);
}

// Label-skewed split: an example of class l goes to client (l mod K) with
// probability q and otherwise to one of the other K-1 clients uniformly.
ClientPartition noniid_label_split(std::span<const std::size_t> train,
                                   std::span<const int> labels, std::size_t K,
                                   double q, std::uint64_t seed);

double avg_node_count(std::span<const Graph> graphs);
inline double avg_node_count(const GraphDataset& ds) {
  return avg_node_count(ds.graphs);
}

// Z-scores the attribute columns that are not purely {0,1}-valued, using
// statistics of the `fit_on` subset. Constant columns are only centered.
// Returns the number of columns that were standardized.
std::size_t standardize_attributes(GraphDataset& ds,
                                   std::span<const std::size_t> fit_on);

// TU benchmark format. The dataset name is the directory's basename unless
// given explicitly.
GraphDataset parse_tu_dataset(const std::filesystem::path& dir);
GraphDataset parse_tu_dataset(const std::filesystem::path& dir,
                              const std::string& name);
// Writes A, graph_indicator and graph_labels, plus node_attributes holding
// every feature column at full precision when `write_features` is set.
// Without features the parser falls back to degree one-hot, so datasets
// whose features are exactly that fallback round-trip either way.
void write_tu_dataset(const GraphDataset& ds, const std::filesystem::path& dir,
                      const std::string& name, bool write_features = true);

}  // namespace fedgnn
