#include "fedgnn/gnn.hpp"

#include <algorithm>
#include <cmath>

#include "fedgnn/errors.hpp"
#include "fedgnn/rng.hpp"

namespace fedgnn {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

std::string conv_name(std::size_t k) {
  return "conv" + std::to_string(k) + ".weight";
}

// Segment indices are positional: conv layers first, then head weight/bias.
ConstMap weight(const ParamVector& p, std::size_t index) {
  const auto& seg = p.layout()->segments()[index];
  return ConstMap(p.segment(index).data(), static_cast<Eigen::Index>(seg.rows),
                  static_cast<Eigen::Index>(seg.cols));
}

MutMap weight(std::vector<double>& buf, const ParamLayout& layout,
              std::size_t index) {
  const auto& seg = layout.segments()[index];
  return MutMap(buf.data() + layout.offset(index),
                static_cast<Eigen::Index>(seg.rows),
                static_cast<Eigen::Index>(seg.cols));
}

void require_layout(const ModelSpec& spec, const ParamVector& params) {
  if (!params.layout() || !(*params.layout() == *spec.layout()))
    throw ContractError("parameter layout does not match the model spec");
}

SparseOperator from_triplets(std::size_t n,
                             const std::vector<Eigen::Triplet<double>>& t) {
  SparseOperator op(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(n));
  op.setFromTriplets(t.begin(), t.end());
  return op;
}

Vector readout(const Matrix& h, Readout r) {
  if (h.rows() == 0) return Vector::Zero(h.cols());
  Vector s = h.colwise().sum().transpose();
  if (r == Readout::kMean) s /= static_cast<double>(h.rows());
  return s;
}

}  // namespace

std::string to_string(ModelKind k) {
  return k == ModelKind::kGcn ? "gcn" : "sage";
}

std::string to_string(Readout r) { return r == Readout::kMean ? "mean" : "sum"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "gcn" || s == "GCN") return ModelKind::kGcn;
  if (s == "sage" || s == "SAGE" || s == "graphsage") return ModelKind::kSage;
  throw ConfigError("unknown model kind '" + s + "' (expected gcn|sage)");
}

Readout parse_readout(const std::string& s) {
  if (s == "mean") return Readout::kMean;
  if (s == "sum") return Readout::kSum;
  throw ConfigError("unknown readout '" + s + "' (expected mean|sum)");
}

void ModelSpec::validate() const {
  if (layer_dims.size() < 2)
    throw ContractError("model needs an input width and at least one layer");
  for (std::size_t w : layer_dims)
    if (w == 0) throw ContractError("layer widths must be positive");
  if (n_classes < 2) throw ContractError("model needs at least two classes");
}

LayoutPtr ModelSpec::layout() const {
  validate();
  std::vector<Segment> segs;
  const std::size_t fan = kind == ModelKind::kSage ? 2 : 1;
  for (std::size_t k = 1; k < layer_dims.size(); ++k)
    segs.push_back({conv_name(k), fan * layer_dims[k - 1], layer_dims[k]});
  segs.push_back({"head.weight", layer_dims.back(), n_classes});
  segs.push_back({"head.bias", 1, n_classes});
  return std::make_shared<const ParamLayout>(std::move(segs));
}

SparseOperator normalize_adjacency(const Graph& g) {
  const std::size_t n = g.n_nodes();
  const auto deg = g.degrees();
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v)
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(deg[v] + 1));
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(n + 2 * g.n_edges());
  for (std::size_t v = 0; v < n; ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    t.emplace_back(i, i, inv_sqrt[v] * inv_sqrt[v]);
  }
  for (const auto& [u, v] : g.edges()) {
    const double w = inv_sqrt[u] * inv_sqrt[v];
    t.emplace_back(u, v, w);
    t.emplace_back(v, u, w);
  }
  return from_triplets(n, t);
}

SparseOperator neighbor_mean(const Graph& g) {
  const std::size_t n = g.n_nodes();
  const auto deg = g.degrees();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(n + 2 * g.n_edges());
  for (std::size_t v = 0; v < n; ++v)
    if (deg[v] == 0) t.emplace_back(v, v, 1.0);
  for (const auto& [u, v] : g.edges()) {
    t.emplace_back(u, v, 1.0 / static_cast<double>(deg[u]));
    t.emplace_back(v, u, 1.0 / static_cast<double>(deg[v]));
  }
  return from_triplets(n, t);
}

Matrix feature_matrix(const Graph& g) {
  return ConstMap(g.features().data(),
                  static_cast<Eigen::Index>(g.n_nodes()),
                  static_cast<Eigen::Index>(g.feature_dim()));
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  auto layout = spec.layout();
  Rng rng = make_rng(derive_seed(seed, Stream::kInit));
  std::vector<double> values(layout->total_size(), 0.0);
  const std::size_t bias = layout->index_of("head.bias");
  for (std::size_t i = 0; i < layout->segments().size(); ++i) {
    if (i == bias) continue;
    const auto& seg = layout->segments()[i];
    const double limit =
        std::sqrt(6.0 / static_cast<double>(seg.rows + seg.cols));
    for (std::size_t j = 0; j < seg.size(); ++j)
      values[layout->offset(i) + j] = (2.0 * uniform01(rng) - 1.0) * limit;
  }
  return ParamVector(std::move(layout), std::move(values));
}

ForwardTrace forward(const ModelSpec& spec, const ParamVector& params,
                     const Graph& g) {
  require_layout(spec, params);
  if (g.feature_dim() != spec.layer_dims.front())
    throw ContractError("graph feature_dim " + std::to_string(g.feature_dim()) +
                        " != model input width " +
                        std::to_string(spec.layer_dims.front()));
  const std::size_t L = spec.n_layers();
  ForwardTrace tr;
  tr.propagation = spec.kind == ModelKind::kGcn ? normalize_adjacency(g)
                                                : neighbor_mean(g);
  Matrix h = feature_matrix(g);
  for (std::size_t k = 0; k < L; ++k) {
    const auto w = weight(params, k);
    Matrix mixed;
    if (spec.kind == ModelKind::kGcn) {
      mixed = tr.propagation * h;
    } else {
      mixed.resize(h.rows(), 2 * h.cols());
      mixed.leftCols(h.cols()) = h;
      mixed.rightCols(h.cols()) = tr.propagation * h;
    }
    Matrix z = mixed * w;
    tr.inputs.push_back(std::move(h));
    h = z.cwiseMax(0.0);
    tr.mixed.push_back(std::move(mixed));
    tr.pre.push_back(std::move(z));
  }
  tr.graph_embedding = readout(h, spec.readout);
  tr.embeddings = std::move(h);
  tr.logits = weight(params, L).transpose() * tr.graph_embedding +
              weight(params, L + 1).row(0).transpose();
  return tr;
}

Vector logits(const ModelSpec& spec, const ParamVector& params,
              const Graph& g) {
  require_layout(spec, params);
  if (g.feature_dim() != spec.layer_dims.front())
    throw ContractError("graph feature_dim does not match model input width");
  const std::size_t L = spec.n_layers();
  const SparseOperator prop = spec.kind == ModelKind::kGcn
                                  ? normalize_adjacency(g)
                                  : neighbor_mean(g);
  Matrix h = feature_matrix(g);
  for (std::size_t k = 0; k < L; ++k) {
    const auto w = weight(params, k);
    if (spec.kind == ModelKind::kGcn) {
      h = ((prop * h) * w).cwiseMax(0.0);
    } else {
      const auto in = h.cols();
      h = (h * w.topRows(in) + (prop * h) * w.bottomRows(in)).cwiseMax(0.0);
    }
  }
  return weight(params, L).transpose() * readout(h, spec.readout) +
         weight(params, L + 1).row(0).transpose();
}

int argmax_lowest(const Vector& z) {
  int best = 0;
  for (Eigen::Index c = 1; c < z.size(); ++c)
    if (z[c] > z[best]) best = static_cast<int>(c);
  return best;
}

LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params,
                       std::span<const Graph* const> batch) {
  if (batch.empty()) throw ContractError("loss over an empty batch");
  const auto layout = params.layout();
  const std::size_t L = spec.n_layers();
  std::vector<double> grad(layout->total_size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;

  for (const Graph* g : batch) {
    const ForwardTrace tr = forward(spec, params, *g);
    const auto y = static_cast<Eigen::Index>(g->label());
    if (y < 0 || y >= static_cast<Eigen::Index>(spec.n_classes))
      throw ContractError("label outside the model's class range");

    const double m = tr.logits.maxCoeff();
    Vector p = (tr.logits.array() - m).exp().matrix();
    const double z = p.sum();
    total += (std::log(z) + m - tr.logits[y]) * inv_b;
    p /= z;
    p[y] -= 1.0;
    const Vector d_logits = p * inv_b;

    weight(grad, *layout, L) += tr.graph_embedding * d_logits.transpose();
    weight(grad, *layout, L + 1).row(0) += d_logits.transpose();
    Vector d_embed = weight(params, L) * d_logits;
    if (spec.readout == Readout::kMean && tr.embeddings.rows() > 0)
      d_embed /= static_cast<double>(tr.embeddings.rows());
    Matrix d_h = Matrix::Ones(tr.embeddings.rows(), 1) * d_embed.transpose();

    for (std::size_t k = L; k-- > 0;) {
      const Matrix d_z =
          d_h.cwiseProduct((tr.pre[k].array() > 0.0).cast<double>().matrix());
      weight(grad, *layout, k) += tr.mixed[k].transpose() * d_z;
      if (k == 0) break;
      const Matrix d_mixed = d_z * weight(params, k).transpose();
      if (spec.kind == ModelKind::kGcn) {
        d_h = tr.propagation.transpose() * d_mixed;
      } else {
        const auto in = tr.inputs[k].cols();
        d_h = d_mixed.leftCols(in) +
              tr.propagation.transpose() * d_mixed.rightCols(in);
      }
    }
  }
  return {total, ParamVector(layout, std::move(grad))};
}

LossGrad loss_and_grad(const ModelSpec& spec, const ParamVector& params,
                       std::span<const Graph> batch) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& g : batch) ptrs.push_back(&g);
  return loss_and_grad(spec, params, ptrs);
}

double loss(const ModelSpec& spec, const ParamVector& params,
            std::span<const Graph> batch) {
  if (batch.empty()) throw ContractError("loss over an empty batch");
  double total = 0.0;
  for (const auto& g : batch) {
    const Vector z = logits(spec, params, g);
    const double m = z.maxCoeff();
    total += std::log((z.array() - m).exp().sum()) + m - z[g.label()];
  }
  return total / static_cast<double>(batch.size());
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad,
                     double lr) {
  params.require_same_layout(grad, "sgd_step");
  std::vector<double> out(params.values().begin(), params.values().end());
  const auto g = grad.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= lr * g[i];
  return ParamVector(params.layout(), std::move(out));
}

}  // namespace fedgnn
