#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedgnn/experiment.hpp"
#include "fedgnn/federation.hpp"
#include "fedgnn/graph.hpp"

namespace fedgnn {

// Where a run's graphs come from: a TU directory, or the synthetic
// triangle-counting generator when no directory is given.
struct DataSource {
  std::optional<std::filesystem::path> tu_dir;
  std::string tu_name;  // defaults to the directory basename
  std::size_t synthetic_graphs = 3000;
  std::size_t synthetic_nodes_lo = 10;
  std::size_t synthetic_nodes_hi = 30;
  std::uint64_t synthetic_seed = 0;
};

GraphDataset load_data(const DataSource& src);

// Contents of a flat key=value config file. Every key is documented in the
// README; unknown keys are rejected.
struct RunFile {
  ScenarioConfig scenario;
  DataSource data;
  bool paired_clean = true;
  std::optional<SweepSpec> sweep;  // present iff sweep.param is set
};

// `origin` names the source in errors; relative dataset paths resolve
// against `base_dir`.
RunFile parse_run_file(const std::string& text, const std::string& origin,
                       const std::filesystem::path& base_dir = {});
RunFile load_run_file(const std::filesystem::path& path);

// key=value lines that reproduce the scenario when parsed back.
std::string describe(const ScenarioConfig& cfg);
std::string describe(const DataSource& src);

}  // namespace fedgnn
