#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedgnn/graph.hpp"

namespace fedgnn {

// Attack knobs: trigger size as a fraction gamma of the average node count,
// edge density rho, poisoning intensity r, and the target class.
struct TriggerParams {
  double gamma = 0.2;
  double rho = 0.8;
  double poison_rate = 0.2;
  int target_label = 0;

  // s = round(gamma * avg_nodes); throws ConfigError when s < 2.
  std::size_t trigger_size(double avg_nodes) const;
  void validate(std::size_t n_classes) const;
};

// Undirected trigger subgraph over nodes [0, n_nodes).
struct TriggerGraph {
  std::size_t n_nodes = 0;
  std::vector<Edge> edges;  // sorted, u < v

  friend bool operator==(const TriggerGraph&, const TriggerGraph&) = default;
};

// What to do with graphs that have fewer nodes than the trigger.
enum class OversizePolicy {
  kExclude,  // never poison them; evaluation sets drop them
  kClip,     // inject the trigger's induced subgraph on its first n nodes
};
std::string to_string(OversizePolicy p);
OversizePolicy parse_oversize_policy(const std::string& s);

// Gilbert G(s, rho): every pair included independently.
TriggerGraph generate_trigger(std::size_t s, double rho, std::uint64_t seed);

// Induced subgraph on the first `n` trigger nodes.
TriggerGraph clip_trigger(const TriggerGraph& t, std::size_t n);

struct Injection {
  Graph graph;
  // sampled[i] is the host node that plays trigger node i.
  std::vector<NodeId> sampled;
};

// Samples t.n_nodes distinct host nodes uniformly, drops every edge among
// them and lays the trigger's edges over them in sampling order. Features
// and all other edges are untouched. Throws InjectionError when the host
// graph is smaller than the trigger.
Injection inject_trigger_mapped(const Graph& g, const TriggerGraph& t,
                                std::uint64_t seed);
inline Graph inject_trigger(const Graph& g, const TriggerGraph& t,
                            std::uint64_t seed) {
  return inject_trigger_mapped(g, t, seed).graph;
}

struct PoisonedData {
  std::vector<Graph> graphs;       // same order and length as the input
  std::vector<std::size_t> poisoned;  // sorted positions that were triggered
};

// Poisons floor(r * |local|) graphs (clamped to the candidates) among those
// whose label differs from the target and that can host the trigger; each
// gets the trigger and the target label. `client` only labels errors.
PoisonedData backdoor_dataset(std::span<const Graph> local,
                              const TriggerGraph& t, double poison_rate,
                              int target_label, std::uint64_t seed,
                              std::size_t client = 0,
                              OversizePolicy policy = OversizePolicy::kExclude);

// Disjoint union with node ids offset in sequence order.
TriggerGraph compose_global_trigger(std::span<const TriggerGraph> locals);

struct EvalSet {
  std::vector<Graph> graphs;  // triggered copies, original labels retained
  int target_label = 0;
};

// Keeps test graphs with label != target that can host the trigger and
// triggers each of them. Throws EvaluationError if nothing is kept.
EvalSet poison_test_set(std::span<const Graph> test, const TriggerGraph& t,
                        int target_label, std::uint64_t seed,
                        OversizePolicy policy = OversizePolicy::kExclude);

// "n_nodes: u-v u-v ..." on one line.
std::string format_trigger(const TriggerGraph& t);

}  // namespace fedgnn
