#include "fedgnn/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fedgnn/errors.hpp"

namespace fedgnn {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  std::size_t line;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string origin)
      : entries_(std::move(entries)), origin_(std::move(origin)) {}

  const Entry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  [[noreturn]] void fail(const Entry& e, const std::string& key,
                         const std::string& what) const {
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + key +
                      ": " + what);
  }

  template <typename T>
  void number(const std::string& key, T& out) {
    const Entry* e = find(key);
    if (!e) return;
    T v{};
    const auto* end = e->value.data() + e->value.size();
    auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || ptr != end || e->value.empty())
      fail(*e, key, "not a valid number: '" + e->value + "'");
    out = v;
  }

  void text(const std::string& key, std::string& out) {
    if (const Entry* e = find(key)) out = e->value;
  }

  template <typename Parse, typename T>
  void choice(const std::string& key, T& out, Parse parse) {
    const Entry* e = find(key);
    if (!e) return;
    try {
      out = parse(e->value);
    } catch (const ConfigError& err) {
      fail(*e, key, err.what());
    }
  }

  void flag(const std::string& key, bool& out) {
    const Entry* e = find(key);
    if (!e) return;
    if (e->value == "true" || e->value == "1") out = true;
    else if (e->value == "false" || e->value == "0") out = false;
    else fail(*e, key, "expected true|false");
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& out) {
    const Entry* e = find(key);
    if (!e) return;
    std::vector<T> vals;
    std::stringstream ss(e->value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      T v{};
      const auto* end = tok.data() + tok.size();
      auto [ptr, ec] = std::from_chars(tok.data(), end, v);
      if (ec != std::errc() || ptr != end || tok.empty())
        fail(*e, key, "bad list element '" + tok + "'");
      vals.push_back(v);
    }
    if (vals.empty()) fail(*e, key, "empty list");
    out = std::move(vals);
  }

  void reject_unused() const {
    for (const auto& [key, e] : entries_)
      if (!used_.count(key))
        throw ConfigError(origin_ + ":" + std::to_string(e.line) +
                          ": unknown key '" + key + "'");
  }

 private:
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
  std::string origin_;
};

// Shortest representation that parses back to the same double.
std::string fmt(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

GraphDataset load_data(const DataSource& src) {
  if (src.tu_dir) {
    return src.tu_name.empty() ? parse_tu_dataset(*src.tu_dir)
                               : parse_tu_dataset(*src.tu_dir, src.tu_name);
  }
  return generate_triangles_dataset(src.synthetic_graphs,
                                    src.synthetic_nodes_lo,
                                    src.synthetic_nodes_hi, src.synthetic_seed);
}

RunFile parse_run_file(const std::string& text, const std::string& origin,
                       const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(no) +
                        ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(no) + ": empty key");
    if (!entries.emplace(key, Entry{value, no}).second)
      throw ConfigError(origin + ":" + std::to_string(no) + ": duplicate key '" +
                        key + "'");
  }

  Reader r(std::move(entries), origin);
  RunFile rf;
  ScenarioConfig& s = rf.scenario;
  r.number("K", s.n_clients);
  r.number("M", s.n_malicious);
  r.choice("attack", s.attack, parse_attack);
  r.choice("defense", s.defense, parse_defense);
  r.choice("model", s.model, parse_model_kind);
  r.list("hidden", s.hidden);
  r.choice("readout", s.readout, parse_readout);
  r.number("rounds", s.rounds);
  r.number("local_epochs", s.local_epochs);
  r.number("batch_size", s.batch_size);
  r.number("lr", s.lr);
  r.number("gamma", s.trigger.gamma);
  r.number("rho", s.trigger.rho);
  r.number("poison_rate", s.trigger.poison_rate);
  r.number("target_label", s.trigger.target_label);
  if (r.find("q")) {
    double q = 0.0;
    r.number("q", q);
    s.split_q = q;
  }
  r.number("train_frac", s.train_frac);
  r.number("seed", s.seed);
  r.choice("oversize_trigger", s.oversize, parse_oversize_policy);
  r.number("dmf_threshold", s.dmf_threshold);
  r.flag("standardize", s.standardize);
  r.number("threads", s.threads);
  r.flag("paired_clean", rf.paired_clean);

  std::string dataset;
  r.text("dataset", dataset);
  if (!dataset.empty()) {
    std::filesystem::path p(dataset);
    rf.data.tu_dir = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  r.text("dataset_name", rf.data.tu_name);
  r.number("synthetic_graphs", rf.data.synthetic_graphs);
  r.number("synthetic_nodes_lo", rf.data.synthetic_nodes_lo);
  r.number("synthetic_nodes_hi", rf.data.synthetic_nodes_hi);
  r.number("synthetic_seed", rf.data.synthetic_seed);

  if (r.find("sweep.param")) {
    SweepSpec sw;
    r.choice("sweep.param", sw.param, parse_sweep_param);
    r.list("sweep.values", sw.values);
    r.number("sweep.replications", sw.replications);
    sw.paired_clean = rf.paired_clean;
    rf.sweep = std::move(sw);
  }
  r.reject_unused();
  if (rf.sweep) {
    rf.sweep->base = rf.scenario;
    rf.sweep->validate();
  }
  return rf;
}

RunFile load_run_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_file(ss.str(), path.string(), path.parent_path());
}

std::string describe(const ScenarioConfig& c) {
  std::ostringstream os;
  os << "K=" << c.n_clients << '\n'
     << "M=" << c.n_malicious << '\n'
     << "attack=" << to_string(c.attack) << '\n'
     << "defense=" << to_string(c.defense) << '\n'
     << "model=" << to_string(c.model) << '\n'
     << "hidden=";
  for (std::size_t i = 0; i < c.hidden.size(); ++i)
    os << (i ? "," : "") << c.hidden[i];
  os << '\n'
     << "readout=" << to_string(c.readout) << '\n'
     << "rounds=" << c.rounds << '\n'
     << "local_epochs=" << c.local_epochs << '\n'
     << "batch_size=" << c.batch_size << '\n'
     << "lr=" << fmt(c.lr) << '\n'
     << "gamma=" << fmt(c.trigger.gamma) << '\n'
     << "rho=" << fmt(c.trigger.rho) << '\n'
     << "poison_rate=" << fmt(c.trigger.poison_rate) << '\n'
     << "target_label=" << c.trigger.target_label << '\n';
  if (c.split_q) os << "q=" << fmt(*c.split_q) << '\n';
  os << "train_frac=" << fmt(c.train_frac) << '\n'
     << "seed=" << c.seed << '\n'
     << "oversize_trigger=" << to_string(c.oversize) << '\n'
     << "dmf_threshold=" << fmt(c.dmf_threshold) << '\n'
     << "standardize=" << (c.standardize ? "true" : "false") << '\n';
  return os.str();
}

std::string describe(const DataSource& d) {
  std::ostringstream os;
  if (d.tu_dir) {
    os << "dataset=" << d.tu_dir->string() << '\n';
    if (!d.tu_name.empty()) os << "dataset_name=" << d.tu_name << '\n';
  } else {
    os << "synthetic_graphs=" << d.synthetic_graphs << '\n'
       << "synthetic_nodes_lo=" << d.synthetic_nodes_lo << '\n'
       << "synthetic_nodes_hi=" << d.synthetic_nodes_hi << '\n'
       << "synthetic_seed=" << d.synthetic_seed << '\n';
  }
  return os.str();
}

}  // namespace fedgnn
