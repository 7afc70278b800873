#include "fedgnn/federation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fedgnn/errors.hpp"
#include "fedgnn/metrics.hpp"
#include "fedgnn/parallel.hpp"
#include "fedgnn/rng.hpp"

namespace fedgnn {

std::string to_string(AttackMode a) {
  switch (a) {
    case AttackMode::kNone: return "none";
    case AttackMode::kCba: return "cba";
    case AttackMode::kDba: return "dba";
  }
  return "?";
}

AttackMode parse_attack(const std::string& s) {
  if (s == "none") return AttackMode::kNone;
  if (s == "cba" || s == "CBA") return AttackMode::kCba;
  if (s == "dba" || s == "DBA") return AttackMode::kDba;
  throw ConfigError("unknown attack '" + s + "' (expected none|cba|dba)");
}

double ScenarioConfig::effective_q(std::size_t n_classes) const {
  if (split_q) return *split_q;
  return n_classes > 2 ? 0.5 : 0.7;
}

ModelSpec ScenarioConfig::model_spec(std::size_t feature_dim,
                                     std::size_t n_classes) const {
  ModelSpec spec;
  spec.kind = model;
  spec.layer_dims.push_back(feature_dim);
  spec.layer_dims.insert(spec.layer_dims.end(), hidden.begin(), hidden.end());
  spec.n_classes = n_classes;
  spec.readout = readout;
  return spec;
}

void ScenarioConfig::validate(std::size_t n_classes) const {
  if (n_clients == 0) throw ConfigError("K must be at least 1");
  if (n_malicious > n_clients)
    throw ConfigError("M = " + std::to_string(n_malicious) + " exceeds K = " +
                      std::to_string(n_clients));
  if (attack == AttackMode::kCba && n_malicious < 1)
    throw ConfigError("CBA needs M >= 1 local triggers to compose");
  if (attack == AttackMode::kDba && n_malicious < 2)
    throw ConfigError("DBA needs M >= 2 malicious clients");
  if (hidden.empty()) throw ConfigError("model needs at least one hidden layer");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ConfigError("train_frac must lie in (0,1)");
  if (n_classes < 2) throw ConfigError("dataset needs at least two classes");
  if (defense == DefenseKind::kDmf && n_clients < 2)
    throw ConfigError("DMF needs K >= 2");
  if (n_clients >= 2) {
    const double q = effective_q(n_classes);
    if (!(q >= 1.0 / static_cast<double>(n_clients) - 1e-12 && q <= 1.0))
      throw ConfigError("split q must lie in [1/K, 1]");
  }
  if (n_malicious > 0) trigger.validate(n_classes);
  if (threads == 0) throw ConfigError("threads must be positive");
}

ClientResult client_update(const ClientState& client, const ParamVector& global,
                           const ScenarioConfig& cfg, const ModelSpec& spec,
                           std::size_t round) {
  Rng rng = make_rng(
      derive_seed(cfg.seed, Stream::kClientRound, {round, client.id}));
  ClientResult out{global, std::numeric_limits<double>::quiet_NaN(), 0};

  std::vector<Graph> poisoned;
  std::span<const Graph> data = client.local;
  if (client.role == ClientRole::kMalicious) {
    if (!client.trigger)
      throw ContractError("malicious client " + std::to_string(client.id) +
                          " has no trigger");
    auto p = backdoor_dataset(client.local, *client.trigger,
                              cfg.trigger.poison_rate, cfg.trigger.target_label,
                              rng(), client.id, cfg.oversize);
    out.n_poisoned = p.poisoned.size();
    poisoned = std::move(p.graphs);
    data = poisoned;
  }
  if (cfg.local_epochs == 0 || data.empty()) return out;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Graph*> batch;
  batch.reserve(cfg.batch_size);
  double loss_sum = 0.0;
  std::size_t n_batches = 0;
  ParamVector params = global;
  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[uniform_below(rng, i)]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t i = start; i < end; ++i) batch.push_back(&data[order[i]]);
      auto lg = loss_and_grad(spec, params, batch);
      params = sgd_step(params, lg.grad, cfg.lr);
      loss_sum += lg.loss;
      ++n_batches;
    }
  }
  out.params = std::move(params);
  out.mean_loss = loss_sum / static_cast<double>(n_batches);
  return out;
}

ParamVector fedavg(std::span<const ParamVector> params) {
  if (params.empty()) throw ContractError("fedavg over zero models");
  // Mean offset from the first model; identical inputs return it unchanged.
  const auto base = params.front().values();
  std::vector<double> acc(base.size(), 0.0);
  for (const auto& p : params.subspan(1)) {
    params.front().require_same_layout(p, "fedavg");
    const auto v = p.values();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += v[j] - base[j];
  }
  const double k = static_cast<double>(params.size());
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] = base[j] + acc[j] / k;
  return ParamVector(params.front().layout(), std::move(acc));
}

FederationResult run_federation(const ScenarioConfig& cfg,
                                const GraphDataset& input) {
  input.validate();
  cfg.validate(input.n_classes);
  const std::size_t K = cfg.n_clients;
  const std::size_t M = cfg.n_malicious;

  FederationResult res;
  GraphDataset data = input;
  const auto split = train_test_split(data, cfg.train_frac, cfg.seed);
  if (cfg.standardize && data.n_attribute_dims > 0)
    res.standardized_columns = standardize_attributes(data, split.train);
  res.n_train = split.train.size();
  res.n_test = split.test.size();
  res.spec = cfg.model_spec(data.feature_dim, data.n_classes);
  res.split_q = cfg.effective_q(data.n_classes);

  ClientPartition partition;
  if (K == 1) {
    partition.parts = {split.train};
  } else {
    const auto labels = data.labels();
    partition =
        noniid_label_split(split.train, labels, K, res.split_q, cfg.seed);
  }

  std::vector<ClientState> clients(K);
  for (std::size_t c = 0; c < K; ++c) {
    clients[c].id = c;
    for (std::size_t idx : partition.parts[c])
      clients[c].local.push_back(data.graphs[idx]);
    res.client_sizes.push_back(clients[c].local.size());
  }

  // Trigger owners: the first M ids of a seeded shuffle.
  std::vector<std::size_t> ids(K);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  {
    Rng rng = make_rng(derive_seed(cfg.seed, Stream::kClientRoles));
    for (std::size_t i = K; i > 1; --i)
      std::swap(ids[i - 1], ids[uniform_below(rng, i)]);
  }
  res.malicious.assign(ids.begin(), ids.begin() + static_cast<long>(M));

  std::vector<Graph> train_graphs;
  for (std::size_t idx : split.train) train_graphs.push_back(data.graphs[idx]);
  for (std::size_t i = 0; i < M; ++i) {
    const auto& local = clients[res.malicious[i]].local;
    // An attacker without data sizes its trigger from the training pool.
    const double avg = local.empty() ? avg_node_count(train_graphs)
                                     : avg_node_count(local);
    res.local_triggers.push_back(
        generate_trigger(cfg.trigger.trigger_size(avg), cfg.trigger.rho,
                         derive_seed(cfg.seed, Stream::kTrigger, {i})));
  }
  if (M > 0) res.global_trigger = compose_global_trigger(res.local_triggers);

  if (cfg.attack == AttackMode::kDba) {
    for (std::size_t i = 0; i < M; ++i) {
      auto& c = clients[res.malicious[i]];
      c.role = ClientRole::kMalicious;
      c.trigger = res.local_triggers[i];
      res.poisoning.push_back(c.id);
    }
  } else if (cfg.attack == AttackMode::kCba) {
    auto& c = clients[res.malicious.front()];
    c.role = ClientRole::kMalicious;
    c.trigger = res.global_trigger;
    res.poisoning.push_back(c.id);
  }

  std::vector<Graph> test_graphs;
  for (std::size_t idx : split.test) test_graphs.push_back(data.graphs[idx]);
  std::vector<EvalSet> evals;  // global first, then locals
  if (M > 0) {
    const int yt = cfg.trigger.target_label;
    evals.push_back(poison_test_set(
        test_graphs, *res.global_trigger, yt,
        derive_seed(cfg.seed, Stream::kEvalInjection, {M}), cfg.oversize));
    for (std::size_t i = 0; i < M; ++i)
      evals.push_back(poison_test_set(
          test_graphs, res.local_triggers[i], yt,
          derive_seed(cfg.seed, Stream::kEvalInjection, {i}), cfg.oversize));
    for (const auto& e : evals) res.eval_sizes.push_back(e.graphs.size());
  }

  ParamVector global = init_params(res.spec, cfg.seed);
  UpdateHistory history(K);
  std::vector<ClientResult> results(K);

  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    parallel_for(K, cfg.threads, [&](std::size_t c) {
      try {
        results[c] = client_update(clients[c], global, cfg, res.spec, t);
      } catch (const ClientFailure&) {
        throw;
      } catch (const std::exception& e) {
        throw ClientFailure(t, c, e.what());
      }
    });

    RoundLog log;
    log.round = t;
    std::vector<ParamVector> locals;
    locals.reserve(K);
    for (auto& r : results) {
      log.losses.push_back(r.mean_loss);
      locals.push_back(std::move(r.params));
    }

    switch (cfg.defense) {
      case DefenseKind::kNone:
        global = fedavg(locals);
        break;
      case DefenseKind::kFoolsGold: {
        for (std::size_t c = 0; c < K; ++c)
          history.accumulate(c, sub(locals[c], global));
        auto outcome = foolsgold_weights(history);
        DefenseLog dl;
        dl.cosine = summarize_off_diagonal(outcome.cosine);
        dl.accepted = static_cast<std::size_t>(std::count_if(
            outcome.weights.begin(), outcome.weights.end(),
            [](double w) { return w > 0.0; }));
        try {
          global = weighted_aggregate(locals, outcome.weights);
        } catch (const DefenseError&) {
          dl.fell_back = true;
        }
        log.weights = std::move(outcome.weights);
        log.defense = dl;
        break;
      }
      case DefenseKind::kDmf: {
        auto outcome = dmf_filter(locals, cfg.dmf_threshold);
        std::vector<ParamVector> kept;
        for (std::size_t c : outcome.accepted) kept.push_back(locals[c]);
        global = fedavg(kept);
        DefenseLog dl;
        dl.cosine = summarize_off_diagonal(outcome.cosine);
        dl.accepted = outcome.accepted.size();
        dl.fail_open = outcome.fail_open;
        log.weights = std::move(outcome.weights);
        log.defense = dl;
        break;
      }
    }

    log.checksum = global.checksum();
    log.clean_acc = clean_accuracy(res.spec, global, test_graphs, cfg.threads);
    if (!evals.empty()) {
      log.asr_global =
          attack_success_rate(res.spec, global, evals.front(), cfg.threads);
      for (std::size_t i = 1; i < evals.size(); ++i)
        log.asr_local.push_back(
            attack_success_rate(res.spec, global, evals[i], cfg.threads));
    }
    res.rounds.push_back(std::move(log));
  }
  res.final_params = std::move(global);
  return res;
}

}  // namespace fedgnn
