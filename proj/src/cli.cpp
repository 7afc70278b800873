#include "fedgnn/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fedgnn/config.hpp"
#include "fedgnn/errors.hpp"
#include "fedgnn/experiment.hpp"
#include "fedgnn/report.hpp"

namespace fedgnn {
namespace {

namespace fs = std::filesystem;

constexpr int kUsageExit = 2;
constexpr int kErrorExit = 1;

std::string round_csv(const FederationResult& run, std::size_t k) {
  std::ostringstream os;
  write_round_csv(os, run, k);
  return os.str();
}

void write_run_outputs(const fs::path& dir, const std::string& stem,
                       const ScenarioConfig& cfg, const DataSource& data,
                       const FederationResult& run) {
  fs::create_directories(dir);
  write_file_atomic(dir / (stem + ".csv"), round_csv(run, cfg.n_clients));
  std::ostringstream jl, mf, ck;
  write_round_jsonl(jl, run);
  write_file_atomic(dir / (stem + ".jsonl"), jl.str());
  write_manifest(mf, cfg, data, run);
  write_file_atomic(dir / (stem + ".manifest.txt"), mf.str());
  write_params(ck, run.final_params);
  write_file_atomic(dir / (stem + ".params"), ck.str());
}

std::string cell_stem(const SweepRow& row) {
  return "cell_" + format_real(row.value) + "_r" +
         std::to_string(row.replication);
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::size_t threads = 1;
};

int do_gen_data(const Common& c, std::size_t graphs, std::size_t lo,
                std::size_t hi, const std::string& name, std::ostream& out) {
  DataSource src;
  if (!c.config.empty()) src = load_run_file(c.config).data;
  if (graphs) src.synthetic_graphs = graphs;
  if (lo) src.synthetic_nodes_lo = lo;
  if (hi) src.synthetic_nodes_hi = hi;
  if (c.seed) src.synthetic_seed = *c.seed;
  const GraphDataset ds = generate_triangles_dataset(
      src.synthetic_graphs, src.synthetic_nodes_lo, src.synthetic_nodes_hi,
      src.synthetic_seed);
  const fs::path dir = fs::path(c.out) / name;
  write_tu_dataset(ds, dir, name, /*write_features=*/false);
  out << "wrote " << ds.size() << " graphs (" << ds.n_classes
      << " classes, avg " << format_real(avg_node_count(ds)) << " nodes) to "
      << dir.string() << '\n';
  return 0;
}

int do_run(const Common& c, std::ostream& out) {
  RunFile rf = load_run_file(c.config);
  if (c.seed) rf.scenario.seed = *c.seed;
  rf.scenario.threads = c.threads;
  const GraphDataset data = load_data(rf.data);
  const ExperimentResult res =
      run_experiment(rf.scenario, data, rf.paired_clean);
  const fs::path dir(c.out);
  write_run_outputs(dir, "rounds", rf.scenario, rf.data, res.run);
  if (res.clean_run) {
    ScenarioConfig clean = rf.scenario;
    clean.attack = AttackMode::kNone;
    write_run_outputs(dir, "clean_rounds", clean, rf.data, *res.clean_run);
  }
  out << "rounds=" << res.run.rounds.size()
      << " clean_acc=" << format_real(res.final_clean_acc);
  if (res.final_asr_global)
    out << " asr_global=" << format_real(*res.final_asr_global);
  for (std::size_t i = 0; i < res.final_asr_local.size(); ++i)
    out << " asr_local_" << i + 1 << '='
        << format_real(res.final_asr_local[i]);
  if (res.cad) out << " cad=" << format_real(*res.cad);
  out << " out=" << dir.string() << '\n';
  return 0;
}

int do_sweep(const Common& c, std::ostream& out) {
  RunFile rf = load_run_file(c.config);
  if (!rf.sweep)
    throw ConfigError(c.config + ": sweep needs sweep.param and sweep.values");
  SweepSpec spec = *rf.sweep;
  if (c.seed) spec.base.seed = *c.seed;
  const GraphDataset data = load_data(rf.data);
  const SweepTable table = run_sweep(spec, data, c.threads);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  for (const auto& row : table.rows)
    if (row.result)
      write_run_outputs(dir, cell_stem(row), row.result->config, rf.data,
                        row.result->run);
  std::ostringstream rows, summary;
  write_sweep_csv(rows, table);
  write_sweep_summary_csv(summary, spec, table);
  write_file_atomic(dir / "sweep.csv", rows.str());
  write_file_atomic(dir / "sweep_summary.csv", summary.str());
  std::size_t failed = 0;
  for (const auto& row : table.rows) failed += !row.result;
  out << summary.str();
  out << "cells=" << table.rows.size() << " failed=" << failed
      << " out=" << dir.string() << '\n';
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Backdoor attacks on federated graph classification"};
  app.name("fedgnn");
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", common.config, "key=value config file");
    if (needs_config) opt->required();
    sub->add_option("--seed", common.seed, "override the run seed");
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--threads", common.threads, "worker threads")
        ->check(CLI::PositiveNumber);
  };

  std::size_t graphs = 0, lo = 0, hi = 0;
  std::string name = "TRIANGLES_SYN";
  auto* gen = app.add_subcommand("gen-data", "write the synthetic dataset as TU files");
  add_common(gen, false);
  gen->add_option("--graphs", graphs, "number of graphs (multiple of 10)");
  gen->add_option("--nodes-lo", lo, "minimum nodes per graph");
  gen->add_option("--nodes-hi", hi, "maximum nodes per graph");
  gen->add_option("--name", name, "dataset name (directory and file prefix)");

  auto* run = app.add_subcommand("run", "run one scenario");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep, true);

  std::vector<std::string> csvs;
  auto* report = app.add_subcommand("report", "summarize round or sweep CSVs");
  report->add_option("csv", csvs, "CSV files")->required();

  std::vector<std::string> argv_store{"fedgnn"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage-error: " << e.what() << '\n';
    return kUsageExit;
  }

  try {
    if (*gen) return do_gen_data(common, graphs, lo, hi, name, out);
    if (*run) return do_run(common, out);
    if (*sweep) return do_sweep(common, out);
    for (const auto& csv : csvs) {
      if (csvs.size() > 1) out << "== " << csv << '\n';
      out << summarize_csv(csv);
    }
    return 0;
  } catch (const Error& e) {
    err << e.prefix() << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "internal-error: " << e.what() << '\n';
  }
  return kErrorExit;
}

}  // namespace fedgnn
