#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedgnn/cli.hpp"
#include "fedgnn/config.hpp"
#include "fedgnn/errors.hpp"
#include "fedgnn/report.hpp"

using namespace fedgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "fedgnn_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("config parsing") {
  const auto rf = parse_run_file(
      "# scenario\nK = 6\nM=2\nattack=cba\ndefense=dmf\nmodel=sage\n"
      "hidden=16,8\nreadout=sum\nrounds=7\nlr=0.05  # comment\nq=0.6\n"
      "oversize_trigger=clip\nstandardize=false\npaired_clean=false\n"
      "synthetic_graphs=200\n",
      "inline");
  const auto& s = rf.scenario;
  CHECK(s.n_clients == 6);
  CHECK(s.n_malicious == 2);
  CHECK(s.attack == AttackMode::kCba);
  CHECK(s.defense == DefenseKind::kDmf);
  CHECK(s.model == ModelKind::kSage);
  CHECK(s.hidden == std::vector<std::size_t>{16, 8});
  CHECK(s.readout == Readout::kSum);
  CHECK(s.rounds == 7);
  CHECK(s.lr == 0.05);
  CHECK(s.split_q == 0.6);
  CHECK(s.oversize == OversizePolicy::kClip);
  CHECK_FALSE(s.standardize);
  CHECK_FALSE(rf.paired_clean);
  CHECK(rf.data.synthetic_graphs == 200);
  CHECK_FALSE(rf.sweep.has_value());
}

TEST_CASE("config describe round-trips") {
  const auto rf = parse_run_file("K=7\nM=3\nattack=dba\nlr=0.125\nq=0.4\nseed=99\n", "a");
  const std::string text = describe(rf.scenario);
  const auto again = parse_run_file(text, "b");
  CHECK(describe(again.scenario) == text);
}

TEST_CASE("config errors name the origin and line") {
  auto message = [](const std::string& text) {
    try {
      parse_run_file(text, "cfg.txt");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("K=5\nbogus=1\n").find("bogus") != std::string::npos);
  CHECK(message("K=5\nK=6\n").find("cfg.txt:2") != std::string::npos);
  CHECK(message("K=five\n").find("cfg.txt:1") != std::string::npos);
  CHECK(message("attack=sometimes\n").find("attack") != std::string::npos);
  CHECK(message("just words\n").find("key=value") != std::string::npos);
  CHECK(message("sweep.param=gamma\n").find("at least one value") != std::string::npos);
  CHECK_THROWS_AS(load_run_file("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("sweep config") {
  const auto rf = parse_run_file(
      "rounds=3\nsweep.param=gamma\nsweep.values=0.15,0.3\nsweep.replications=3\n", "s");
  REQUIRE(rf.sweep.has_value());
  CHECK(rf.sweep->param == SweepParam::kGamma);
  CHECK(rf.sweep->values == std::vector<double>{0.15, 0.3});
  CHECK(rf.sweep->replications == 3);
  CHECK(rf.sweep->base.rounds == 3);
}

TEST_CASE("cli rejects a missing config file by path") {
  const auto r = cli({"run", "--config", "missing.toml"});
  CHECK(r.code != 0);
  CHECK(r.err.find("missing.toml") != std::string::npos);
  CHECK(r.err.rfind("config-error:", 0) == 0);
}

TEST_CASE("cli usage errors") {
  const auto unknown = cli({"train"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.rfind("usage-error:", 0) == 0);
  CHECK(cli({"run"}).code == 2);
  CHECK(cli({"run", "--config", "x", "--bogus"}).code == 2);
  CHECK(cli({"run", "--config", "x", "--threads", "0"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("gen-data then run writes T rows, deterministically") {
  const fs::path dir = scratch("pipeline");
  const auto gen = cli({"gen-data", "--graphs", "200", "--nodes-lo", "8", "--nodes-hi",
                        "14", "--seed", "3", "--out", dir.string()});
  REQUIRE(gen.code == 0);
  CHECK(fs::exists(dir / "TRIANGLES_SYN" / "TRIANGLES_SYN_A.txt"));

  std::ofstream(dir / "run.cfg") << "dataset=TRIANGLES_SYN\nK=4\nM=2\nhidden=8\n"
                                    "rounds=4\nlocal_epochs=1\nbatch_size=8\n";
  const auto a = cli({"run", "--config", (dir / "run.cfg").string(), "--out",
                      (dir / "a").string()});
  REQUIRE(a.code == 0);
  CHECK(a.out.find("rounds=4") != std::string::npos);
  const std::string csv = slurp(dir / "a" / "rounds.csv");
  CHECK(count_lines(csv) == 5);
  CHECK(csv.rfind("round,clean_acc,asr_global,asr_local_1,asr_local_2,", 0) == 0);
  CHECK(count_lines(slurp(dir / "a" / "rounds.jsonl")) == 4);
  CHECK(fs::exists(dir / "a" / "clean_rounds.csv"));
  const std::string manifest = slurp(dir / "a" / "rounds.manifest.txt");
  CHECK(manifest.find("trigger_global=") != std::string::npos);
  CHECK(manifest.find("malicious=") != std::string::npos);
  CHECK(load_params(dir / "a" / "rounds.params").size() > 0);

  const auto b = cli({"run", "--config", (dir / "run.cfg").string(), "--out",
                      (dir / "b").string(), "--threads", "3"});
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "b" / "rounds.csv") == csv);
  CHECK(slurp(dir / "b" / "rounds.jsonl") == slurp(dir / "a" / "rounds.jsonl"));

  const auto c = cli({"run", "--config", (dir / "run.cfg").string(), "--out",
                      (dir / "c").string(), "--seed", "5"});
  REQUIRE(c.code == 0);
  CHECK(slurp(dir / "c" / "rounds.csv") != csv);

  const auto rep = cli({"report", (dir / "a" / "rounds.csv").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("rounds") != std::string::npos);
}

TEST_CASE("sweep subcommand writes rows and summary") {
  const fs::path dir = scratch("sweep");
  std::ofstream(dir / "sweep.cfg")
      << "synthetic_graphs=100\nsynthetic_nodes_lo=8\nsynthetic_nodes_hi=12\n"
         "K=3\nM=2\nhidden=6\nrounds=1\nlocal_epochs=1\npaired_clean=false\n"
         "sweep.param=poison_rate\nsweep.values=0.1,0.3\nsweep.replications=2\n";
  const auto r = cli({"sweep", "--config", (dir / "sweep.cfg").string(), "--out",
                      (dir / "out").string()});
  REQUIRE(r.code == 0);
  CHECK(count_lines(slurp(dir / "out" / "sweep.csv")) == 5);
  CHECK(count_lines(slurp(dir / "out" / "sweep_summary.csv")) == 3);
  CHECK(fs::exists(dir / "out" / "cell_0.3_r1.csv"));
  const auto rep = cli({"report", (dir / "out" / "sweep.csv").string()});
  CHECK(rep.code == 0);

  const auto no_sweep = cli({"sweep", "--config", (dir / "sweep.cfg").string() + ".x"});
  CHECK(no_sweep.code == 1);
}

TEST_CASE("structured errors keep their prefix") {
  const fs::path dir = scratch("errors");
  std::ofstream(dir / "bad.cfg") << "dataset=nowhere\n";
  const auto r = cli({"run", "--config", (dir / "bad.cfg").string()});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("parse-error:", 0) == 0);
  std::ofstream(dir / "bad2.cfg") << "K=3\nM=4\nsynthetic_graphs=20\n";
  const auto r2 = cli({"run", "--config", (dir / "bad2.cfg").string(), "--out",
                       (dir / "o").string()});
  CHECK(r2.code == 1);
  CHECK(r2.err.rfind("config-error:", 0) == 0);
  CHECK(cli({"report", (dir / "none.csv").string()}).code == 1);
}

TEST_CASE("format_real uses six significant digits") {
  CHECK(format_real(0.123456789) == "0.123457");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(std::nan("")) == "nan");
}

TEST_CASE("atomic writes replace the target") {
  const fs::path dir = scratch("atomic");
  write_file_atomic(dir / "f.txt", "one");
  write_file_atomic(dir / "f.txt", "two");
  CHECK(slurp(dir / "f.txt") == "two");
  CHECK_FALSE(fs::exists(dir / "f.txt.tmp"));
}
