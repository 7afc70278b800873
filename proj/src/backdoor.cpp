#include "fedgnn/backdoor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fedgnn/errors.hpp"
#include "fedgnn/rng.hpp"

namespace fedgnn {
namespace {

// First k entries of a seeded partial Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + uniform_below(rng, n - i)]);
  pool.resize(k);
  return pool;
}

bool can_host(const Graph& g, const TriggerGraph& t, OversizePolicy policy) {
  return policy == OversizePolicy::kClip || g.n_nodes() >= t.n_nodes;
}

Graph inject_with_policy(const Graph& g, const TriggerGraph& t,
                         std::uint64_t seed, OversizePolicy policy) {
  if (policy == OversizePolicy::kClip && g.n_nodes() < t.n_nodes)
    return inject_trigger(g, clip_trigger(t, g.n_nodes()), seed);
  return inject_trigger(g, t, seed);
}

}  // namespace

std::size_t TriggerParams::trigger_size(double avg_nodes) const {
  const auto s = static_cast<long>(std::lround(gamma * avg_nodes));
  if (s < 2)
    throw ConfigError("trigger size round(" + std::to_string(gamma) + " * " +
                      std::to_string(avg_nodes) + ") = " + std::to_string(s) +
                      " is below 2");
  return static_cast<std::size_t>(s);
}

void TriggerParams::validate(std::size_t n_classes) const {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0,1]");
  if (!(poison_rate > 0.0 && poison_rate < 1.0))
    throw ConfigError("poison_rate must lie in (0,1)");
  if (target_label < 0 || static_cast<std::size_t>(target_label) >= n_classes)
    throw ConfigError("target_label " + std::to_string(target_label) +
                      " outside [0," + std::to_string(n_classes) + ")");
}

std::string to_string(OversizePolicy p) {
  return p == OversizePolicy::kExclude ? "exclude" : "clip";
}

OversizePolicy parse_oversize_policy(const std::string& s) {
  if (s == "exclude") return OversizePolicy::kExclude;
  if (s == "clip") return OversizePolicy::kClip;
  throw ConfigError("unknown oversize_trigger '" + s +
                    "' (expected exclude|clip)");
}

TriggerGraph generate_trigger(std::size_t s, double rho, std::uint64_t seed) {
  if (s < 2) throw ConfigError("trigger needs at least 2 nodes");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0,1]");
  Rng rng = make_rng(seed);
  TriggerGraph t;
  t.n_nodes = s;
  for (NodeId u = 0; u < s; ++u)
    for (NodeId v = u + 1; v < s; ++v)
      if (bernoulli(rng, rho)) t.edges.emplace_back(u, v);
  return t;
}

TriggerGraph clip_trigger(const TriggerGraph& t, std::size_t n) {
  TriggerGraph out;
  out.n_nodes = std::min(n, t.n_nodes);
  for (const auto& e : t.edges)
    if (e.second < out.n_nodes) out.edges.push_back(e);
  return out;
}

Injection inject_trigger_mapped(const Graph& g, const TriggerGraph& t,
                                std::uint64_t seed) {
  if (g.n_nodes() < t.n_nodes)
    throw InjectionError("graph with " + std::to_string(g.n_nodes()) +
                         " nodes cannot host a " + std::to_string(t.n_nodes) +
                         "-node trigger");
  Rng rng = make_rng(seed);
  const auto picks = sample_without_replacement(g.n_nodes(), t.n_nodes, rng);
  std::vector<bool> in_sample(g.n_nodes(), false);
  for (std::size_t v : picks) in_sample[v] = true;

  std::vector<Edge> edges;
  edges.reserve(g.n_edges() + t.edges.size());
  for (const auto& e : g.edges())
    if (!(in_sample[e.first] && in_sample[e.second])) edges.push_back(e);
  for (const auto& [a, b] : t.edges)
    edges.emplace_back(static_cast<NodeId>(picks[a]),
                       static_cast<NodeId>(picks[b]));

  Injection out{g.with_edges(std::move(edges)), {}};
  out.sampled.assign(picks.begin(), picks.end());
  return out;
}

PoisonedData backdoor_dataset(std::span<const Graph> local,
                              const TriggerGraph& t, double poison_rate,
                              int target_label, std::uint64_t seed,
                              std::size_t client, OversizePolicy policy) {
  if (!(poison_rate > 0.0 && poison_rate < 1.0))
    throw ConfigError("poison_rate must lie in (0,1)");
  PoisonedData out{{local.begin(), local.end()}, {}};
  const auto wanted = static_cast<std::size_t>(
      std::floor(poison_rate * static_cast<double>(local.size())));
  if (wanted == 0) return out;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < local.size(); ++i)
    if (local[i].label() != target_label && can_host(local[i], t, policy))
      candidates.push_back(i);
  if (candidates.empty())
    throw PoisoningError(client, "no graph with a non-target label can host a " +
                                     std::to_string(t.n_nodes) +
                                     "-node trigger");

  Rng rng = make_rng(seed);
  const std::size_t n = std::min(wanted, candidates.size());
  for (std::size_t pick : sample_without_replacement(candidates.size(), n, rng))
    out.poisoned.push_back(candidates[pick]);
  std::sort(out.poisoned.begin(), out.poisoned.end());
  for (std::size_t i : out.poisoned)
    out.graphs[i] =
        inject_with_policy(local[i], t, rng(), policy).with_label(target_label);
  return out;
}

TriggerGraph compose_global_trigger(std::span<const TriggerGraph> locals) {
  if (locals.empty()) throw ContractError("no local triggers to compose");
  TriggerGraph out;
  for (const auto& t : locals) {
    const auto offset = static_cast<NodeId>(out.n_nodes);
    for (const auto& [u, v] : t.edges)
      out.edges.emplace_back(u + offset, v + offset);
    out.n_nodes += t.n_nodes;
  }
  return out;
}

EvalSet poison_test_set(std::span<const Graph> test, const TriggerGraph& t,
                        int target_label, std::uint64_t seed,
                        OversizePolicy policy) {
  Rng rng = make_rng(seed);
  EvalSet out;
  out.target_label = target_label;
  for (const auto& g : test) {
    if (g.label() == target_label || !can_host(g, t, policy)) continue;
    out.graphs.push_back(inject_with_policy(g, t, rng(), policy));
  }
  if (out.graphs.empty())
    throw EvaluationError("no non-target test graph can host a " +
                          std::to_string(t.n_nodes) + "-node trigger");
  return out;
}

std::string format_trigger(const TriggerGraph& t) {
  std::ostringstream os;
  os << t.n_nodes << ':';
  for (const auto& [u, v] : t.edges) os << ' ' << u << '-' << v;
  return os.str();
}

}  // namespace fedgnn
