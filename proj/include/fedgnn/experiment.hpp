#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedgnn/federation.hpp"

namespace fedgnn {

struct ExperimentResult {
  ScenarioConfig config;
  FederationResult run;
  std::optional<FederationResult> clean_run;  // same config, attack = none
  std::optional<double> final_asr_global;
  std::vector<double> final_asr_local;
  double final_clean_acc = 0.0;
  std::optional<double> cad;  // clean baseline acc - attacked clean acc
  double wall_seconds = 0.0;
};

// Runs the scenario and, when `paired_clean` is set and the scenario has an
// attack, the attack-free twin used for the clean accuracy drop.
ExperimentResult run_experiment(const ScenarioConfig& cfg,
                                const GraphDataset& data,
                                bool paired_clean = true);

// Clean accuracy drop: clean.final_clean_acc - attacked.final_clean_acc.
// Throws ConfigError when the configs differ in anything but the attack.
double cad(const ExperimentResult& attacked, const ExperimentResult& clean);

enum class SweepParam { kGamma, kRho, kPoisonRate, kMalicious, kClients };
std::string to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& s);

struct SweepSpec {
  SweepParam param = SweepParam::kGamma;
  std::vector<double> values;
  std::size_t replications = 1;
  ScenarioConfig base;
  bool paired_clean = true;

  // Config for one cell; replication r runs with seed base.seed + r.
  ScenarioConfig cell_config(double value, std::size_t replication) const;
  void validate() const;
};

struct SweepRow {
  double value = 0.0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::optional<ExperimentResult> result;
  std::string error;  // set when the cell failed
};

struct SweepAggregate {
  double value = 0.0;
  std::size_t n_ok = 0;
  double asr_mean = 0.0, asr_stderr = 0.0;
  double acc_mean = 0.0, acc_stderr = 0.0;
  std::optional<double> cad_mean, cad_stderr;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // value-major, replication-minor
  std::vector<SweepAggregate> aggregates;
};

// Mean and standard error (sample stddev / sqrt(n); 0 for n < 2).
std::pair<double, double> mean_stderr(const std::vector<double>& xs);

// Cells run in parallel up to `threads`; each failed cell is annotated and
// the sweep continues.
SweepTable run_sweep(const SweepSpec& spec, const GraphDataset& data,
                     std::size_t threads = 1);
std::vector<SweepAggregate> aggregate_rows(const SweepSpec& spec,
                                           const std::vector<SweepRow>& rows);

}  // namespace fedgnn
