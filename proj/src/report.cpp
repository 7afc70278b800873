#include "fedgnn/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fedgnn/errors.hpp"

namespace fedgnn {
namespace {

std::string join_ids(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string opt(const std::optional<double>& x) {
  return x ? format_real(*x) : std::string();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::json json_real(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_round_csv(std::ostream& out, const FederationResult& run,
                     std::size_t n_clients) {
  const std::size_t m = run.local_triggers.size();
  out << "round,clean_acc,asr_global";
  for (std::size_t i = 1; i <= m; ++i) out << ",asr_local_" << i;
  for (std::size_t i = 1; i <= n_clients; ++i) out << ",weight_" << i;
  for (std::size_t i = 1; i <= n_clients; ++i) out << ",loss_" << i;
  out << ",cos_min,cos_mean,cos_max,accepted,fail_open,fell_back\n";
  for (const auto& r : run.rounds) {
    out << r.round << ',' << format_real(r.clean_acc) << ','
        << opt(r.asr_global);
    for (std::size_t i = 0; i < m; ++i)
      out << ',' << (i < r.asr_local.size() ? format_real(r.asr_local[i]) : "");
    for (std::size_t i = 0; i < n_clients; ++i)
      out << ',' << (i < r.weights.size() ? format_real(r.weights[i]) : "");
    for (std::size_t i = 0; i < n_clients; ++i)
      out << ',' << (i < r.losses.size() ? format_real(r.losses[i]) : "");
    if (r.defense) {
      const auto& d = *r.defense;
      out << ',' << format_real(d.cosine.min) << ','
          << format_real(d.cosine.mean) << ',' << format_real(d.cosine.max)
          << ',' << d.accepted << ',' << int(d.fail_open) << ','
          << int(d.fell_back);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

void write_round_jsonl(std::ostream& out, const FederationResult& run) {
  for (const auto& r : run.rounds) {
    nlohmann::json j;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(r.checksum));
    j["round"] = r.round;
    j["checksum"] = hex;
    j["clean_acc"] = r.clean_acc;
    j["asr_global"] = r.asr_global ? nlohmann::json(*r.asr_global) : nullptr;
    j["asr_local"] = r.asr_local;
    j["weights"] = r.weights;
    nlohmann::json losses = nlohmann::json::array();
    for (double l : r.losses) losses.push_back(json_real(l));
    j["losses"] = losses;
    if (r.defense) {
      j["defense"] = {{"cos_min", r.defense->cosine.min},
                      {"cos_mean", r.defense->cosine.mean},
                      {"cos_max", r.defense->cosine.max},
                      {"accepted", r.defense->accepted},
                      {"fail_open", r.defense->fail_open},
                      {"fell_back", r.defense->fell_back}};
    }
    out << j.dump() << '\n';
  }
}

void write_manifest(std::ostream& out, const ScenarioConfig& cfg,
                    const DataSource& data, const FederationResult& run) {
  out << "# fedgnn run manifest\n"
      << "version=" << kVersion << '\n'
      << describe(cfg) << describe(data) << "effective_q=" << run.split_q
      << '\n'
      << "layer_dims=" << join_ids(run.spec.layer_dims) << '\n'
      << "n_classes=" << run.spec.n_classes << '\n'
      << "n_train=" << run.n_train << '\n'
      << "n_test=" << run.n_test << '\n'
      << "standardized_columns=" << run.standardized_columns << '\n'
      << "client_sizes=" << join_ids(run.client_sizes) << '\n'
      << "malicious=" << join_ids(run.malicious) << '\n'
      << "poisoning=" << join_ids(run.poisoning) << '\n';
  for (std::size_t i = 0; i < run.local_triggers.size(); ++i)
    out << "trigger_local_" << i + 1 << '='
        << format_trigger(run.local_triggers[i]) << '\n';
  if (run.global_trigger)
    out << "trigger_global=" << format_trigger(*run.global_trigger) << '\n';
  out << "eval_sizes=" << join_ids(run.eval_sizes) << '\n'
      << "argmax_tie_break=lowest_class_index\n"
      << "injection_streams=seed,round,client\n";
  if (!run.rounds.empty()) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(run.rounds.back().checksum));
    out << "final_checksum=" << hex << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << "value,replication,seed,status,asr_global,clean_acc,cad,"
         "asr_local_mean,wall_seconds,error\n";
  for (const auto& row : table.rows) {
    out << format_real(row.value) << ',' << row.replication << ',' << row.seed
        << ',';
    if (!row.result) {
      std::string msg = row.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << "failed,,,,,," << msg << '\n';
      continue;
    }
    const auto& r = *row.result;
    double local_mean = std::nan("");
    if (!r.final_asr_local.empty()) {
      local_mean = 0.0;
      for (double a : r.final_asr_local) local_mean += a;
      local_mean /= static_cast<double>(r.final_asr_local.size());
    }
    out << "ok," << opt(r.final_asr_global) << ','
        << format_real(r.final_clean_acc) << ',' << opt(r.cad) << ','
        << (r.final_asr_local.empty() ? "" : format_real(local_mean)) << ','
        << format_real(r.wall_seconds) << ",\n";
  }
}

void write_sweep_summary_csv(std::ostream& out, const SweepSpec& spec,
                             const SweepTable& table) {
  out << to_string(spec.param)
      << ",n,asr_mean,asr_stderr,acc_mean,acc_stderr,cad_mean,cad_stderr\n";
  for (const auto& a : table.aggregates)
    out << format_real(a.value) << ',' << a.n_ok << ','
        << format_real(a.asr_mean) << ',' << format_real(a.asr_stderr) << ','
        << format_real(a.acc_mean) << ',' << format_real(a.acc_stderr) << ','
        << opt(a.cad_mean) << ',' << opt(a.cad_stderr) << '\n';
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string summarize_csv(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot read " + csv.string());
  std::string header_line;
  if (!std::getline(in, header_line))
    throw ParseError(csv.string(), 1, "empty CSV");
  const auto header = split_csv(header_line);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(split_csv(line));

  std::ostringstream os;
  auto number = [](const std::string& s, double& x) {
    if (s.empty() || s == "nan") return false;
    x = std::stod(s);
    return true;
  };

  if (header.front() == "round") {
    os << "rounds: " << rows.size() << '\n';
    os << "column            final      max        mean(last 10)\n";
    for (std::size_t c = 1; c < header.size(); ++c) {
      const auto& name = header[c];
      if (name.rfind("loss_", 0) == 0 || name.rfind("weight_", 0) == 0 ||
          name.rfind("cos_", 0) == 0 || name == "accepted" ||
          name == "fail_open" || name == "fell_back")
        continue;
      std::vector<double> vals;
      for (const auto& r : rows) {
        double x;
        if (c < r.size() && number(r[c], x)) vals.push_back(x);
      }
      if (vals.empty()) continue;
      double mx = vals.front();
      for (double v : vals) mx = std::max(mx, v);
      const std::size_t tail = std::min<std::size_t>(10, vals.size());
      double tail_mean = 0.0;
      for (std::size_t i = vals.size() - tail; i < vals.size(); ++i)
        tail_mean += vals[i];
      tail_mean /= static_cast<double>(tail);
      char line[128];
      std::snprintf(line, sizeof line, "%-16s  %-9s  %-9s  %s\n", name.c_str(),
                    format_real(vals.back()).c_str(), format_real(mx).c_str(),
                    format_real(tail_mean).c_str());
      os << line;
    }
    return os.str();
  }
  if (header.front() == "value") {
    std::map<double, std::vector<std::vector<std::string>>> groups;
    for (const auto& r : rows) groups[std::stod(r[0])].push_back(r);
    os << "value      n  asr_global (mean +- stderr)  clean_acc (mean +- "
          "stderr)  cad (mean +- stderr)\n";
    for (const auto& [v, rs] : groups) {
      std::vector<double> asr, acc, cadv;
      for (const auto& r : rs) {
        if (r.size() < 7 || r[3] != "ok") continue;
        double x;
        if (number(r[4], x)) asr.push_back(x);
        if (number(r[5], x)) acc.push_back(x);
        if (number(r[6], x)) cadv.push_back(x);
      }
      const auto [am, as] = mean_stderr(asr);
      const auto [cm, cs] = mean_stderr(acc);
      os << format_real(v) << "  " << acc.size() << "  " << format_real(am)
         << " +- " << format_real(as) << "  " << format_real(cm) << " +- "
         << format_real(cs);
      if (!cadv.empty()) {
        const auto [dm, ds] = mean_stderr(cadv);
        os << "  " << format_real(dm) << " +- " << format_real(ds);
      }
      os << '\n';
    }
    return os.str();
  }
  throw ParseError(csv.string(), 1,
                   "unrecognized CSV header (expected a round or sweep CSV)");
}

}  // namespace fedgnn
