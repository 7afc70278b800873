#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "fedgnn/errors.hpp"
#include "fedgnn/graph.hpp"

namespace fedgnn {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& file,
               std::size_t line) {
  T value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end || tok.empty())
    throw ParseError(file, line, "not a number: '" + std::string(tok) + "'");
  return value;
}

// Non-empty lines of a file, each tagged with its 1-based line number.
std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError(p.filename().string(), 0, "cannot open file");
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    lines.emplace_back(no, line);
  }
  return lines;
}

fs::path require(const fs::path& dir, const std::string& file) {
  fs::path p = dir / file;
  if (!fs::exists(p)) throw ParseError(file, 0, "missing required file");
  return p;
}

}  // namespace

GraphDataset parse_tu_dataset(const fs::path& dir) {
  fs::path d = dir;
  if (d.filename().empty()) d = d.parent_path();
  return parse_tu_dataset(dir, d.filename().string());
}

GraphDataset parse_tu_dataset(const fs::path& dir, const std::string& name) {
  const std::string a_file = name + "_A.txt";
  const std::string ind_file = name + "_graph_indicator.txt";
  const std::string gl_file = name + "_graph_labels.txt";
  const std::string nl_file = name + "_node_labels.txt";
  const std::string na_file = name + "_node_attributes.txt";

  // Node -> graph assignment. Graph ids are 1-based and nodes of one graph
  // are contiguous in the TU format.
  const auto ind_lines = read_lines(require(dir, ind_file));
  const auto gl_lines = read_lines(require(dir, gl_file));
  const auto a_lines = read_lines(require(dir, a_file));

  const std::size_t n_total = ind_lines.size();
  std::vector<std::size_t> graph_of(n_total);
  std::vector<std::size_t> local_id(n_total);
  std::size_t n_graphs = 0;
  for (std::size_t i = 0; i < n_total; ++i) {
    const auto& [no, text] = ind_lines[i];
    const auto gid = parse_number<std::size_t>(trim(text), ind_file, no);
    if (gid == 0) throw ParseError(ind_file, no, "graph ids are 1-based");
    if (gid < n_graphs)
      throw ParseError(ind_file, no, "nodes of a graph must be contiguous");
    n_graphs = std::max(n_graphs, gid);
    graph_of[i] = gid - 1;
  }
  std::vector<std::size_t> graph_size(n_graphs, 0);
  for (std::size_t i = 0; i < n_total; ++i) local_id[i] = graph_size[graph_of[i]]++;

  if (gl_lines.size() != n_graphs)
    throw ParseError(gl_file, gl_lines.empty() ? 0 : gl_lines.back().first,
                     "has " + std::to_string(gl_lines.size()) +
                         " labels but the graph indicator declares " +
                         std::to_string(n_graphs) + " graphs");
  std::vector<long> raw_labels;
  raw_labels.reserve(n_graphs);
  for (const auto& [no, text] : gl_lines)
    raw_labels.push_back(parse_number<long>(trim(text), gl_file, no));

  std::vector<std::vector<Edge>> edges(n_graphs);
  for (const auto& [no, text] : a_lines) {
    const auto toks = split_commas(text);
    if (toks.size() != 2) throw ParseError(a_file, no, "expected 'u, v'");
    const auto u = parse_number<std::size_t>(toks[0], a_file, no);
    const auto v = parse_number<std::size_t>(toks[1], a_file, no);
    if (u == 0 || v == 0 || u > n_total || v > n_total)
      throw ParseError(a_file, no,
                       "edge (" + std::to_string(u) + "," + std::to_string(v) +
                           ") references a node outside 1.." +
                           std::to_string(n_total));
    if (graph_of[u - 1] != graph_of[v - 1])
      throw ParseError(a_file, no, "edge crosses graphs");
    if (u == v) continue;
    edges[graph_of[u - 1]].emplace_back(static_cast<NodeId>(local_id[u - 1]),
                                        static_cast<NodeId>(local_id[v - 1]));
  }

  // Node label one-hot block.
  std::size_t label_dims = 0;
  std::vector<std::size_t> node_label_idx;
  if (fs::exists(dir / nl_file)) {
    const auto lines = read_lines(dir / nl_file);
    if (lines.size() != n_total)
      throw ParseError(nl_file, lines.empty() ? 0 : lines.back().first,
                       "has " + std::to_string(lines.size()) +
                           " node labels for " + std::to_string(n_total) +
                           " nodes");
    std::vector<long> raw;
    raw.reserve(n_total);
    for (const auto& [no, text] : lines) {
      // Some TU datasets carry several comma-separated node labels; the first
      // is the categorical one.
      raw.push_back(parse_number<long>(split_commas(text).front(), nl_file, no));
    }
    std::map<long, std::size_t> remap;
    for (long x : raw) remap.emplace(x, 0);
    for (auto& [k, v] : remap) v = label_dims++;
    node_label_idx.reserve(n_total);
    for (long x : raw) node_label_idx.push_back(remap[x]);
  }

  std::size_t attr_dims = 0;
  std::vector<double> attrs;
  if (fs::exists(dir / na_file)) {
    const auto lines = read_lines(dir / na_file);
    if (lines.size() != n_total)
      throw ParseError(na_file, lines.empty() ? 0 : lines.back().first,
                       "has " + std::to_string(lines.size()) +
                           " attribute rows for " + std::to_string(n_total) +
                           " nodes");
    for (const auto& [no, text] : lines) {
      const auto toks = split_commas(text);
      if (attr_dims == 0) attr_dims = toks.size();
      if (toks.size() != attr_dims)
        throw ParseError(na_file, no,
                         "expected " + std::to_string(attr_dims) +
                             " attributes, got " + std::to_string(toks.size()));
      for (auto t : toks) attrs.push_back(parse_number<double>(t, na_file, no));
    }
  }

  std::map<long, int> class_of;
  for (long x : raw_labels) class_of.emplace(x, 0);
  int next_class = 0;
  for (auto& [k, v] : class_of) v = next_class++;

  GraphDataset ds;
  ds.n_classes = class_of.size();
  const bool structural = label_dims == 0 && attr_dims == 0;
  ds.feature_dim = structural ? kDegreeFeatureDim : label_dims + attr_dims;
  ds.n_attribute_dims = attr_dims;
  ds.graphs.reserve(n_graphs);
  std::size_t first_node = 0;
  for (std::size_t gi = 0; gi < n_graphs; ++gi) {
    const std::size_t n = graph_size[gi];
    const int label = class_of[raw_labels[gi]];
    Graph g(n, std::move(edges[gi]), {}, 0, label);
    if (structural) {
      g = g.with_features(degree_one_hot(g), kDegreeFeatureDim);
    } else {
      std::vector<double> f(n * ds.feature_dim, 0.0);
      for (std::size_t v = 0; v < n; ++v) {
        const std::size_t node = first_node + v;
        double* row = f.data() + v * ds.feature_dim;
        if (label_dims > 0) row[node_label_idx[node]] = 1.0;
        for (std::size_t a = 0; a < attr_dims; ++a)
          row[label_dims + a] = attrs[node * attr_dims + a];
      }
      g = g.with_features(std::move(f), ds.feature_dim);
    }
    ds.graphs.push_back(std::move(g));
    first_node += n;
  }
  return ds;
}

void write_tu_dataset(const GraphDataset& ds, const fs::path& dir,
                      const std::string& name, bool write_features) {
  fs::create_directories(dir);
  auto open = [&](const std::string& suffix) {
    std::ofstream out(dir / (name + suffix));
    if (!out) throw ParseError(name + suffix, 0, "cannot create file");
    return out;
  };
  std::ofstream a = open("_A.txt");
  std::ofstream ind = open("_graph_indicator.txt");
  std::ofstream gl = open("_graph_labels.txt");
  std::ofstream na;
  if (write_features) na = open("_node_attributes.txt");

  std::size_t offset = 1;
  char buf[32];
  for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
    const Graph& g = ds.graphs[gi];
    for (const auto& [u, v] : g.edges()) {
      a << offset + u << ", " << offset + v << '\n';
      a << offset + v << ", " << offset + u << '\n';
    }
    for (std::size_t v = 0; v < g.n_nodes(); ++v) {
      ind << gi + 1 << '\n';
      if (!write_features) continue;
      const auto row = g.feature_row(v);
      for (std::size_t k = 0; k < row.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", row[k]);
        na << (k ? ", " : "") << buf;
      }
      na << '\n';
    }
    gl << g.label() << '\n';
    offset += g.n_nodes();
  }
}

}  // namespace fedgnn
