#include "fedgnn/experiment.hpp"

#include <chrono>
#include <cmath>

#include "fedgnn/errors.hpp"
#include "fedgnn/parallel.hpp"

namespace fedgnn {
namespace {

ExperimentResult summarize(const ScenarioConfig& cfg, FederationResult run) {
  ExperimentResult r;
  r.config = cfg;
  if (!run.rounds.empty()) {
    const RoundLog& last = run.rounds.back();
    r.final_asr_global = last.asr_global;
    r.final_asr_local = last.asr_local;
    r.final_clean_acc = last.clean_acc;
  }
  r.run = std::move(run);
  return r;
}

bool same_except_attack(ScenarioConfig a, ScenarioConfig b) {
  a.attack = b.attack = AttackMode::kNone;
  a.threads = b.threads = 1;
  return a.n_clients == b.n_clients && a.n_malicious == b.n_malicious &&
         a.defense == b.defense && a.model == b.model && a.hidden == b.hidden &&
         a.readout == b.readout && a.rounds == b.rounds &&
         a.local_epochs == b.local_epochs && a.batch_size == b.batch_size &&
         a.lr == b.lr && a.trigger.gamma == b.trigger.gamma &&
         a.trigger.rho == b.trigger.rho &&
         a.trigger.poison_rate == b.trigger.poison_rate &&
         a.trigger.target_label == b.trigger.target_label &&
         a.split_q == b.split_q && a.train_frac == b.train_frac &&
         a.seed == b.seed && a.oversize == b.oversize &&
         a.dmf_threshold == b.dmf_threshold && a.standardize == b.standardize;
}

}  // namespace

ExperimentResult run_experiment(const ScenarioConfig& cfg,
                                const GraphDataset& data, bool paired_clean) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r = summarize(cfg, run_federation(cfg, data));
  if (paired_clean && cfg.attack != AttackMode::kNone) {
    ScenarioConfig clean_cfg = cfg;
    clean_cfg.attack = AttackMode::kNone;
    ExperimentResult clean = summarize(clean_cfg, run_federation(clean_cfg, data));
    r.cad = cad(r, clean);
    r.clean_run = std::move(clean.run);
  }
  r.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return r;
}

double cad(const ExperimentResult& attacked, const ExperimentResult& clean) {
  if (!same_except_attack(attacked.config, clean.config))
    throw ConfigError("CAD needs runs that differ only in the attack mode");
  return clean.final_clean_acc - attacked.final_clean_acc;
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::kGamma: return "gamma";
    case SweepParam::kRho: return "rho";
    case SweepParam::kPoisonRate: return "poison_rate";
    case SweepParam::kMalicious: return "M";
    case SweepParam::kClients: return "K";
  }
  return "?";
}

SweepParam parse_sweep_param(const std::string& s) {
  if (s == "gamma") return SweepParam::kGamma;
  if (s == "rho") return SweepParam::kRho;
  if (s == "poison_rate" || s == "r") return SweepParam::kPoisonRate;
  if (s == "M") return SweepParam::kMalicious;
  if (s == "K") return SweepParam::kClients;
  throw ConfigError("unknown sweep parameter '" + s +
                    "' (expected gamma|rho|poison_rate|M|K)");
}

ScenarioConfig SweepSpec::cell_config(double value,
                                      std::size_t replication) const {
  ScenarioConfig c = base;
  c.seed = base.seed + replication;
  switch (param) {
    case SweepParam::kGamma: c.trigger.gamma = value; break;
    case SweepParam::kRho: c.trigger.rho = value; break;
    case SweepParam::kPoisonRate: c.trigger.poison_rate = value; break;
    case SweepParam::kMalicious:
      c.n_malicious = static_cast<std::size_t>(std::llround(value));
      break;
    case SweepParam::kClients:
      c.n_clients = static_cast<std::size_t>(std::llround(value));
      break;
  }
  return c;
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (replications == 0) throw ConfigError("sweep needs replications >= 1");
  for (double v : values) {
    bool ok = true;
    switch (param) {
      case SweepParam::kGamma: ok = v > 0.0; break;
      case SweepParam::kRho: ok = v > 0.0 && v <= 1.0; break;
      case SweepParam::kPoisonRate: ok = v > 0.0 && v < 1.0; break;
      case SweepParam::kMalicious:
      case SweepParam::kClients:
        ok = v >= 0.0 && v == std::floor(v);
        break;
    }
    if (!ok)
      throw ConfigError("sweep value " + std::to_string(v) +
                        " is invalid for " + to_string(param));
  }
}

std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return {m, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

std::vector<SweepAggregate> aggregate_rows(const SweepSpec& spec,
                                           const std::vector<SweepRow>& rows) {
  std::vector<SweepAggregate> out;
  for (double v : spec.values) {
    std::vector<double> asr, acc, cads;
    for (const auto& row : rows) {
      if (row.value != v || !row.result) continue;
      asr.push_back(row.result->final_asr_global.value_or(0.0));
      acc.push_back(row.result->final_clean_acc);
      if (row.result->cad) cads.push_back(*row.result->cad);
    }
    SweepAggregate a;
    a.value = v;
    a.n_ok = asr.size();
    std::tie(a.asr_mean, a.asr_stderr) = mean_stderr(asr);
    std::tie(a.acc_mean, a.acc_stderr) = mean_stderr(acc);
    if (!cads.empty()) {
      auto [m, s] = mean_stderr(cads);
      a.cad_mean = m;
      a.cad_stderr = s;
    }
    out.push_back(a);
  }
  return out;
}

SweepTable run_sweep(const SweepSpec& spec, const GraphDataset& data,
                     std::size_t threads) {
  spec.validate();
  SweepTable table;
  for (double v : spec.values)
    for (std::size_t r = 0; r < spec.replications; ++r)
      table.rows.push_back({v, r, spec.base.seed + r, std::nullopt, {}});
  parallel_for(table.rows.size(), threads, [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    try {
      row.result = run_experiment(spec.cell_config(row.value, row.replication),
                                  data, spec.paired_clean);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  table.aggregates = aggregate_rows(spec, table.rows);
  return table;
}

}  // namespace fedgnn
