#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedgnn/param_vector.hpp"

namespace fedgnn {

enum class DefenseKind { kNone, kFoolsGold, kDmf };
std::string to_string(DefenseKind d);
DefenseKind parse_defense(const std::string& s);

// Per-client running sum of updates (local params minus the global model
// they started from).
class UpdateHistory {
 public:
  explicit UpdateHistory(std::size_t n_clients) : sums_(n_clients) {}

  void accumulate(std::size_t client, const ParamVector& update);
  std::size_t n_clients() const noexcept { return sums_.size(); }
  // Empty optional until the client's first update.
  const std::optional<ParamVector>& sum(std::size_t client) const {
    return sums_.at(client);
  }

 private:
  std::vector<std::optional<ParamVector>> sums_;
};

using CosineMatrix = std::vector<std::vector<double>>;

CosineMatrix pairwise_cosine(std::span<const ParamVector> vectors);

struct CosineSummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};
// Over off-diagonal entries i < j; zeros for fewer than two vectors.
CosineSummary summarize_off_diagonal(const CosineMatrix& m);

struct DefenseOutcome {
  std::vector<double> weights;         // FoolsGold; indicator weights for DMF
  std::vector<std::size_t> accepted;   // DMF
  bool fail_open = false;              // DMF found no majority cluster
  CosineMatrix cosine;
};

// FoolsGold weights from cumulative histories: pairwise cosine, pardoning,
// 1 - max similarity, rescale by the maximum, logit sharpening.
// Clients with a zero (or missing) history get weight 1 and take no part in
// the similarity computation.
DefenseOutcome foolsgold_weights(const UpdateHistory& history);

// Average-linkage agglomerative clustering on cosine distance, merging while
// the closest pair of clusters is within `merge_threshold`. Accepts the
// largest cluster of size >= floor(K/2)+1, else every client (fail-open).
inline constexpr double kDefaultDmfThreshold = 0.5;
DefenseOutcome dmf_filter(std::span<const ParamVector> client_params,
                          double merge_threshold = kDefaultDmfThreshold);

// sum_i w_i p_i / sum_i w_i. Throws DefenseError when the weights sum to
// zero and ContractError on layout or length mismatch.
ParamVector weighted_aggregate(std::span<const ParamVector> params,
                               std::span<const double> weights);

}  // namespace fedgnn
