#include "graphssl/tudataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "graphssl/zip.hpp"

namespace graphssl {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("tudataset: cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  // Blank trailing lines are ignored.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("tudataset: bad integer '" + s + "' in " + where);
  }
}

double parse_real(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("tudataset: bad real '" + s + "' in " + where);
  }
}

}  // namespace

bool tu_files_present(const std::filesystem::path& dir, const std::string& name) {
  namespace fs = std::filesystem;
  return fs::exists(dir / (name + "_A.txt")) &&
         fs::exists(dir / (name + "_graph_indicator.txt")) &&
         fs::exists(dir / (name + "_graph_labels.txt"));
}

TuRawCorpus parse_tu_corpus(const std::filesystem::path& dir, const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path a_file = dir / (name + "_A.txt");
  const fs::path ind_file = dir / (name + "_graph_indicator.txt");
  const fs::path lab_file = dir / (name + "_graph_labels.txt");
  for (const fs::path& p : {a_file, ind_file, lab_file})
    if (!fs::exists(p)) throw std::runtime_error("tudataset: missing mandatory file " + p.string());

  TuRawCorpus raw;
  for (const std::string& line : read_lines(a_file)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 2) throw std::runtime_error("tudataset: bad edge line '" + line + "'");
    raw.edges.emplace_back(parse_int(f[0], a_file.string()), parse_int(f[1], a_file.string()));
  }
  for (const std::string& line : read_lines(ind_file)) {
    if (trim(line).empty()) continue;
    raw.graph_indicator.push_back(parse_int(trim(line), ind_file.string()));
  }
  for (const std::string& line : read_lines(lab_file)) {
    if (trim(line).empty()) continue;
    raw.graph_labels.push_back(parse_int(trim(line), lab_file.string()));
  }

  const fs::path nl_file = dir / (name + "_node_labels.txt");
  if (fs::exists(nl_file)) {
    std::vector<int> labels;
    for (const std::string& line : read_lines(nl_file)) {
      if (trim(line).empty()) continue;
      labels.push_back(parse_int(trim(line), nl_file.string()));
    }
    raw.node_labels = std::move(labels);
  }
  const fs::path na_file = dir / (name + "_node_attributes.txt");
  if (fs::exists(na_file)) {
    std::vector<std::vector<double>> attrs;
    for (const std::string& line : read_lines(na_file)) {
      if (trim(line).empty()) continue;
      std::vector<double> row;
      for (const std::string& f : split_csv(line)) row.push_back(parse_real(f, na_file.string()));
      attrs.push_back(std::move(row));
    }
    raw.node_attributes = std::move(attrs);
  }
  return raw;
}

void write_tu_corpus(const TuRawCorpus& raw, const std::filesystem::path& dir,
                     const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(dir / (name + "_A.txt"));
    for (const auto& [u, v] : raw.edges) out << u << ", " << v << "\n";
  }
  {
    std::ofstream out(dir / (name + "_graph_indicator.txt"));
    for (int g : raw.graph_indicator) out << g << "\n";
  }
  {
    std::ofstream out(dir / (name + "_graph_labels.txt"));
    for (int l : raw.graph_labels) out << l << "\n";
  }
  if (raw.node_labels) {
    std::ofstream out(dir / (name + "_node_labels.txt"));
    for (int l : *raw.node_labels) out << l << "\n";
  }
  if (raw.node_attributes) {
    std::ofstream out(dir / (name + "_node_attributes.txt"));
    char buf[64];
    for (const auto& row : *raw.node_attributes) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
        out << (j ? ", " : "") << buf;
      }
      out << "\n";
    }
  }
}

Dataset build_dataset(const TuRawCorpus& raw, const std::string& name) {
  const int num_nodes = static_cast<int>(raw.graph_indicator.size());
  const int num_graphs = static_cast<int>(raw.graph_labels.size());
  if (num_graphs == 0) throw std::runtime_error("tudataset: no graphs");

  // Graph indicator must be grouped: non-decreasing and covering 1..G.
  int prev = 0;
  for (std::size_t i = 0; i < raw.graph_indicator.size(); ++i) {
    const int g = raw.graph_indicator[i];
    if (g < prev)
      throw std::runtime_error("tudataset: graph indicator decreases at node line " +
                               std::to_string(i + 1));
    if (g < 1 || g > num_graphs)
      throw std::runtime_error("tudataset: graph indicator " + std::to_string(g) +
                               " outside [1," + std::to_string(num_graphs) + "]");
    prev = g;
  }

  if (raw.node_labels && static_cast<int>(raw.node_labels->size()) != num_nodes)
    throw std::runtime_error("tudataset: node label count differs from node count");
  if (raw.node_attributes) {
    if (static_cast<int>(raw.node_attributes->size()) != num_nodes)
      throw std::runtime_error("tudataset: node attribute count differs from node count");
    for (std::size_t i = 1; i < raw.node_attributes->size(); ++i)
      if ((*raw.node_attributes)[i].size() != (*raw.node_attributes)[0].size())
        throw std::runtime_error("tudataset: ragged node attribute row at line " +
                                 std::to_string(i + 1));
  }

  // Node index ranges per graph.
  std::vector<int> first_node(static_cast<std::size_t>(num_graphs), -1);
  std::vector<int> node_count(static_cast<std::size_t>(num_graphs), 0);
  for (int i = 0; i < num_nodes; ++i) {
    const int g = raw.graph_indicator[static_cast<std::size_t>(i)] - 1;
    if (first_node[static_cast<std::size_t>(g)] < 0) first_node[static_cast<std::size_t>(g)] = i;
    ++node_count[static_cast<std::size_t>(g)];
  }
  for (int g = 0; g < num_graphs; ++g)
    if (node_count[static_cast<std::size_t>(g)] == 0)
      throw std::runtime_error("tudataset: graph " + std::to_string(g + 1) + " has no nodes");

  // Undirected edges per graph; (i,j)/(j,i) duplicates collapse.
  std::vector<std::set<std::pair<int, int>>> edge_sets(static_cast<std::size_t>(num_graphs));
  for (const auto& [u1, v1] : raw.edges) {
    if (u1 < 1 || u1 > num_nodes || v1 < 1 || v1 > num_nodes)
      throw std::runtime_error("tudataset: node id out of range in edge (" + std::to_string(u1) +
                               "," + std::to_string(v1) + ")");
    const int u = u1 - 1, v = v1 - 1;
    const int gu = raw.graph_indicator[static_cast<std::size_t>(u)] - 1;
    const int gv = raw.graph_indicator[static_cast<std::size_t>(v)] - 1;
    if (gu != gv)
      throw std::runtime_error("tudataset: edge (" + std::to_string(u1) + "," +
                               std::to_string(v1) + ") spans graphs");
    if (u == v) continue;  // self-loops never occur in TU corpora; ignore defensively
    const int base = first_node[static_cast<std::size_t>(gu)];
    edge_sets[static_cast<std::size_t>(gu)].insert(
        {std::min(u, v) - base, std::max(u, v) - base});
  }

  // Feature recipe.
  int label_dim = 0;
  std::map<int, int> label_index;
  if (raw.node_labels) {
    std::set<int> distinct(raw.node_labels->begin(), raw.node_labels->end());
    for (int v : distinct) label_index.emplace(v, label_dim++);
  }
  const int attr_dim =
      raw.node_attributes ? static_cast<int>((*raw.node_attributes)[0].size()) : 0;

  std::vector<int> degree;
  int degree_dim = 0;
  if (!raw.node_labels && !raw.node_attributes) {
    degree.assign(static_cast<std::size_t>(num_nodes), 0);
    for (int g = 0; g < num_graphs; ++g)
      for (const auto& [u, v] : edge_sets[static_cast<std::size_t>(g)]) {
        const int base = first_node[static_cast<std::size_t>(g)];
        ++degree[static_cast<std::size_t>(base + u)];
        ++degree[static_cast<std::size_t>(base + v)];
      }
    const int max_degree = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
    degree_dim = max_degree + 1;
  }
  const int fdim = (label_dim + attr_dim > 0) ? label_dim + attr_dim : degree_dim;

  // Dense class ids by ascending original label value.
  std::map<int, int> class_index;
  {
    std::set<int> distinct(raw.graph_labels.begin(), raw.graph_labels.end());
    int next = 0;
    for (int v : distinct) class_index.emplace(v, next++);
  }

  Dataset ds;
  ds.name = name;
  ds.feature_dim = fdim;
  ds.num_classes = static_cast<int>(class_index.size());
  ds.graphs.reserve(static_cast<std::size_t>(num_graphs));
  for (int g = 0; g < num_graphs; ++g) {
    Graph gr;
    gr.num_nodes = node_count[static_cast<std::size_t>(g)];
    gr.label = class_index.at(raw.graph_labels[static_cast<std::size_t>(g)]);
    gr.edges.assign(edge_sets[static_cast<std::size_t>(g)].begin(),
                    edge_sets[static_cast<std::size_t>(g)].end());
    gr.node_features = Tensor(static_cast<std::size_t>(gr.num_nodes),
                              static_cast<std::size_t>(fdim));
    const int base = first_node[static_cast<std::size_t>(g)];
    for (int i = 0; i < gr.num_nodes; ++i) {
      const std::size_t node = static_cast<std::size_t>(base + i);
      if (raw.node_labels) {
        const int col = label_index.at((*raw.node_labels)[node]);
        gr.node_features(static_cast<std::size_t>(i), static_cast<std::size_t>(col)) = 1.0;
      }
      if (raw.node_attributes)
        for (int j = 0; j < attr_dim; ++j)
          gr.node_features(static_cast<std::size_t>(i),
                           static_cast<std::size_t>(label_dim + j)) =
              (*raw.node_attributes)[node][static_cast<std::size_t>(j)];
      if (!raw.node_labels && !raw.node_attributes)
        gr.node_features(static_cast<std::size_t>(i),
                         static_cast<std::size_t>(degree[node])) = 1.0;
    }
    ds.graphs.push_back(std::move(gr));
  }
  return ds;
}

Dataset load_tudataset(const TuSourceConfig& cfg) {
  const std::filesystem::path dir = cfg.root_dir / cfg.dataset_name;
  return build_dataset(parse_tu_corpus(dir, cfg.dataset_name), cfg.dataset_name);
}

}  // namespace graphssl
