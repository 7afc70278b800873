#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedgnn/backdoor.hpp"
#include "fedgnn/defenses.hpp"
#include "fedgnn/gnn.hpp"
#include "fedgnn/graph.hpp"
#include "fedgnn/param_vector.hpp"

namespace fedgnn {

enum class AttackMode { kNone, kCba, kDba };
std::string to_string(AttackMode a);
AttackMode parse_attack(const std::string& s);

struct ScenarioConfig {
  std::size_t n_clients = 5;     // K
  std::size_t n_malicious = 3;   // M: number of local triggers / attackers
  AttackMode attack = AttackMode::kDba;
  DefenseKind defense = DefenseKind::kNone;
  ModelKind model = ModelKind::kGcn;
  std::vector<std::size_t> hidden = {32, 32};
  Readout readout = Readout::kMean;
  std::size_t rounds = 100;      // T
  std::size_t local_epochs = 2;  // E
  std::size_t batch_size = 16;   // B
  double lr = 0.01;
  TriggerParams trigger;
  // Non-iid skew; unset picks 0.5 for multi-class data and 0.7 for binary.
  std::optional<double> split_q;
  double train_frac = 0.8;
  std::uint64_t seed = 0;
  OversizePolicy oversize = OversizePolicy::kExclude;
  double dmf_threshold = kDefaultDmfThreshold;
  bool standardize = true;
  std::size_t threads = 1;

  double effective_q(std::size_t n_classes) const;
  ModelSpec model_spec(std::size_t feature_dim, std::size_t n_classes) const;
  // Throws ConfigError on any violated scenario invariant.
  void validate(std::size_t n_classes) const;
};

enum class ClientRole { kHonest, kMalicious };

struct ClientState {
  std::size_t id = 0;
  ClientRole role = ClientRole::kHonest;
  std::vector<Graph> local;
  std::optional<TriggerGraph> trigger;  // set iff malicious
};

struct ClientResult {
  ParamVector params;
  double mean_loss = 0.0;  // NaN when the client did not train
  std::size_t n_poisoned = 0;
};

// Local training: poisons the local view afresh when malicious, then runs
// E epochs of shuffled minibatch SGD from the global model. All randomness
// is keyed by (seed, round, client id).
ClientResult client_update(const ClientState& client, const ParamVector& global,
                           const ScenarioConfig& cfg, const ModelSpec& spec,
                           std::size_t round);

// Unweighted element-wise mean.
ParamVector fedavg(std::span<const ParamVector> params);

struct DefenseLog {
  CosineSummary cosine;
  std::size_t accepted = 0;
  bool fail_open = false;
  bool fell_back = false;  // weights summed to zero; previous model kept
};

struct RoundLog {
  std::size_t round = 0;  // 1-based
  std::uint64_t checksum = 0;
  double clean_acc = 0.0;
  std::optional<double> asr_global;
  std::vector<double> asr_local;
  std::vector<double> weights;  // empty without a defense
  std::vector<double> losses;
  std::optional<DefenseLog> defense;
};

struct FederationResult {
  ModelSpec spec;
  double split_q = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t standardized_columns = 0;
  std::vector<std::size_t> malicious;   // trigger owners, trigger order
  std::vector<std::size_t> poisoning;   // clients that actually poison
  std::vector<std::size_t> client_sizes;
  std::vector<TriggerGraph> local_triggers;
  std::optional<TriggerGraph> global_trigger;
  std::vector<std::size_t> eval_sizes;  // global first, then locals
  std::vector<RoundLog> rounds;
  ParamVector final_params;
};

FederationResult run_federation(const ScenarioConfig& cfg,
                                const GraphDataset& data);

}  // namespace fedgnn
