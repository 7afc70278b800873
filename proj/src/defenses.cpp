#include "fedgnn/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fedgnn/errors.hpp"

namespace fedgnn {

std::string to_string(DefenseKind d) {
  switch (d) {
    case DefenseKind::kNone: return "none";
    case DefenseKind::kFoolsGold: return "foolsgold";
    case DefenseKind::kDmf: return "dmf";
  }
  return "?";
}

DefenseKind parse_defense(const std::string& s) {
  if (s == "none") return DefenseKind::kNone;
  if (s == "foolsgold" || s == "FoolsGold") return DefenseKind::kFoolsGold;
  if (s == "dmf" || s == "DMF") return DefenseKind::kDmf;
  throw ConfigError("unknown defense '" + s + "' (expected none|foolsgold|dmf)");
}

void UpdateHistory::accumulate(std::size_t client, const ParamVector& update) {
  auto& slot = sums_.at(client);
  slot = slot ? add(*slot, update) : update;
}

CosineMatrix pairwise_cosine(std::span<const ParamVector> v) {
  const std::size_t k = v.size();
  CosineMatrix m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    m[i][i] = l2(v[i]) > 0.0 ? 1.0 : 0.0;
    for (std::size_t j = i + 1; j < k; ++j) m[i][j] = m[j][i] = cosine(v[i], v[j]);
  }
  return m;
}

CosineSummary summarize_off_diagonal(const CosineMatrix& m) {
  CosineSummary s;
  if (m.size() < 2) return s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      s.min = std::min(s.min, m[i][j]);
      s.max = std::max(s.max, m[i][j]);
      total += m[i][j];
      ++count;
    }
  s.mean = total / static_cast<double>(count);
  return s;
}

namespace {
constexpr double kSimilarityTolerance = 1e-9;
}  // namespace

DefenseOutcome foolsgold_weights(const UpdateHistory& history) {
  const std::size_t k = history.n_clients();
  DefenseOutcome out;
  out.weights.assign(k, 1.0);
  if (k < 2) return out;

  // Only clients with a non-zero history take part in the similarity.
  std::vector<std::size_t> active;
  std::vector<ParamVector> vecs;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& h = history.sum(i);
    if (h && l2(*h) > 0.0) {
      active.push_back(i);
      vecs.push_back(*h);
    }
  }
  out.cosine = CosineMatrix(k, std::vector<double>(k, 0.0));
  const std::size_t n = active.size();
  if (n < 2) return out;

  CosineMatrix cs = pairwise_cosine(vecs);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      out.cosine[active[a]][active[b]] = cs[a][b];

  std::vector<double> max_cs(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) max_cs[i] = std::max(max_cs[i], cs[i][j]);

  // Pardoning: damp similarity toward clients that look less sybil-like.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && max_cs[i] > max_cs[j]) cs[i][j] *= max_cs[j] / max_cs[i];

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m = std::max(m, cs[i][j]);
    // Gaps within round-off of zero count as exact duplicates.
    const double gap = 1.0 - m;
    w[i] = gap < kSimilarityTolerance ? 0.0 : std::min(gap, 1.0);
  }
  const double top = *std::max_element(w.begin(), w.end());
  if (top > 0.0)
    for (double& x : w) x /= top;
  for (double& x : w) {
    if (x <= 0.0 || x >= 1.0) continue;
    x = std::clamp(std::log(x / (1.0 - x)) + 0.5, 0.0, 1.0);
  }
  for (std::size_t a = 0; a < n; ++a) out.weights[active[a]] = w[a];
  return out;
}

DefenseOutcome dmf_filter(std::span<const ParamVector> params,
                          double merge_threshold) {
  const std::size_t k = params.size();
  if (k < 2) throw ContractError("DMF needs at least two clients");
  DefenseOutcome out;
  out.cosine = pairwise_cosine(params);

  std::vector<std::vector<double>> dist(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j) dist[i][j] = 1.0 - out.cosine[i][j];

  std::vector<std::vector<std::size_t>> clusters(k);
  for (std::size_t i = 0; i < k; ++i) clusters[i] = {i};
  auto linkage = [&](const std::vector<std::size_t>& a,
                     const std::vector<std::size_t>& b) {
    double s = 0.0;
    for (std::size_t i : a)
      for (std::size_t j : b) s += dist[i][j];
    return s / static_cast<double>(a.size() * b.size());
  };
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = linkage(clusters[i], clusters[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    if (best > merge_threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(),
                        clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }

  const std::size_t majority = k / 2 + 1;
  const std::vector<std::size_t>* winner = nullptr;
  for (const auto& c : clusters)
    if (c.size() >= majority && (!winner || c.size() > winner->size()))
      winner = &c;
  if (winner) {
    out.accepted = *winner;
  } else {
    out.fail_open = true;
    out.accepted.resize(k);
    for (std::size_t i = 0; i < k; ++i) out.accepted[i] = i;
  }
  std::sort(out.accepted.begin(), out.accepted.end());
  out.weights.assign(k, 0.0);
  for (std::size_t i : out.accepted) out.weights[i] = 1.0;
  return out;
}

ParamVector weighted_aggregate(std::span<const ParamVector> params,
                               std::span<const double> weights) {
  if (params.empty()) throw ContractError("aggregating zero models");
  if (params.size() != weights.size())
    throw ContractError("weight count does not match model count");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DefenseError("negative aggregation weight");
    total += w;
  }
  if (!(total > 0.0)) throw DefenseError("aggregation weights sum to zero");
  std::vector<double> acc(params.front().size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    params.front().require_same_layout(params[i], "weighted_aggregate");
    if (weights[i] == 0.0) continue;
    const auto v = params[i].values();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += weights[i] * v[j];
  }
  for (double& x : acc) x /= total;
  return ParamVector(params.front().layout(), std::move(acc));
}

}  // namespace fedgnn
