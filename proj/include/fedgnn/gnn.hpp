#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "fedgnn/graph.hpp"
#include "fedgnn/param_vector.hpp"

namespace fedgnn {

enum class ModelKind { kGcn, kSage };
enum class Readout { kMean, kSum };

std::string to_string(ModelKind k);
std::string to_string(Readout r);
ModelKind parse_model_kind(const std::string& s);
Readout parse_readout(const std::string& s);

// layer_dims = (d, h_1, ..., h_L). Hidden layers use ReLU; the classifier
// head is affine.
struct ModelSpec {
  ModelKind kind = ModelKind::kGcn;
  std::vector<std::size_t> layer_dims;
  std::size_t n_classes = 2;
  Readout readout = Readout::kMean;

  std::size_t n_layers() const noexcept {
    return layer_dims.empty() ? 0 : layer_dims.size() - 1;
  }
  // Throws ContractError unless L >= 1, all widths > 0 and C >= 2.
  void validate() const;
  // Segments conv{k}.weight for k = 1..L, then head.weight and head.bias.
  LayoutPtr layout() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseOperator normalize_adjacency(const Graph& g);
// Row-normalized neighbor mean; a node without neighbors averages itself.
SparseOperator neighbor_mean(const Graph& g);

Matrix feature_matrix(const Graph& g);

struct ForwardTrace {
  SparseOperator propagation;    // GCN: normalized adjacency, SAGE: mean
  std::vector<Matrix> inputs;    // H^(k-1), one per layer
  std::vector<Matrix> mixed;     // GCN: A H, SAGE: [H | mean(H)]
  std::vector<Matrix> pre;       // pre-activation Z^(k)
  Matrix embeddings;             // H^(L)
  Vector graph_embedding;        // READOUT(H^(L))
  Vector logits;
};

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

ForwardTrace forward(const ModelSpec& spec, const ParamVector& params,
                     const Graph& g);
// Logits only; skips storing intermediates.
Vector logits(const ModelSpec& spec, const ParamVector& params,
              const Graph& g);
// argmax with ties going to the lowest class index.
int argmax_lowest(const Vector& logits);
inline int predict(const ModelSpec& spec, const ParamVector& params,
                   const Graph& g) {
  return argmax_lowest(logits(spec, params, g));
}

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Mean softmax cross-entropy over the batch and its exact gradient.
LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params,
                       std::span<const Graph* const> batch);
LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params,
                       std::span<const Graph> batch);
double loss(const ModelSpec& spec, const ParamVector& params,
            std::span<const Graph> batch);

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad,
                     double lr);

}  // namespace fedgnn
