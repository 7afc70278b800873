#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fedgnn/config.hpp"
#include "fedgnn/experiment.hpp"
#include "fedgnn/federation.hpp"

namespace fedgnn {

inline constexpr const char* kVersion = "0.1.0";

// Six significant digits; "nan" for NaN.
std::string format_real(double x);

// One row per round: round, clean_acc, asr_global, asr_local_1..M,
// weight_1..K, loss_1..K, then defense diagnostics.
void write_round_csv(std::ostream& out, const FederationResult& run,
                     std::size_t n_clients);
// Same content as the CSV, one JSON object per line, plus the checksum.
void write_round_jsonl(std::ostream& out, const FederationResult& run);
void write_manifest(std::ostream& out, const ScenarioConfig& cfg,
                    const DataSource& data, const FederationResult& run);

void write_sweep_csv(std::ostream& out, const SweepTable& table);
void write_sweep_summary_csv(std::ostream& out, const SweepSpec& spec,
                             const SweepTable& table);

// Writes `content` to `path` via a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// Human-readable summary of a round CSV or a sweep CSV.
std::string summarize_csv(const std::filesystem::path& csv);

}  // namespace fedgnn
