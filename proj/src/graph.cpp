#include "graphssl/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace graphssl {

namespace {

std::pair<int, int> normalized(const std::pair<int, int>& e) {
  return e.first <= e.second ? e : std::pair<int, int>{e.second, e.first};
}

}  // namespace

ValidationReport validate(const Graph& g) {
  if (g.num_nodes < 0) return {false, "negative node count"};
  if (static_cast<int>(g.node_features.rows()) != g.num_nodes)
    return {false, "feature row count " + std::to_string(g.node_features.rows()) +
                       " differs from num_nodes " + std::to_string(g.num_nodes)};
  std::set<std::pair<int, int>> seen;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& [u, v] = g.edges[k];
    if (u < 0 || u >= g.num_nodes || v < 0 || v >= g.num_nodes)
      return {false, "edge " + std::to_string(k) + " endpoint (" + std::to_string(u) + "," +
                         std::to_string(v) + ") out of range [0," + std::to_string(g.num_nodes) +
                         ")"};
    if (u == v) return {false, "edge " + std::to_string(k) + " is a self-loop at node " +
                                   std::to_string(u)};
    if (!seen.insert(normalized(g.edges[k])).second)
      return {false, "duplicate undirected edge (" + std::to_string(u) + "," +
                         std::to_string(v) + ") at position " + std::to_string(k)};
  }
  return {};
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("induced_subgraph: empty keep set");
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.front() < 0 || sorted.back() >= g.num_nodes)
    throw std::invalid_argument("induced_subgraph: node index out of range");

  std::vector<int> relabel(static_cast<std::size_t>(g.num_nodes), -1);
  for (std::size_t i = 0; i < sorted.size(); ++i)
    relabel[static_cast<std::size_t>(sorted[i])] = static_cast<int>(i);

  Graph out;
  out.num_nodes = static_cast<int>(sorted.size());
  out.label = g.label;
  out.node_features = Tensor(sorted.size(), g.node_features.cols());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = 0; j < g.node_features.cols(); ++j)
      out.node_features(i, j) = g.node_features(static_cast<std::size_t>(sorted[i]), j);
  for (const auto& [u, v] : g.edges) {
    const int ru = relabel[static_cast<std::size_t>(u)];
    const int rv = relabel[static_cast<std::size_t>(v)];
    if (ru >= 0 && rv >= 0) out.edges.emplace_back(ru, rv);
  }
  return out;
}

GraphBatch batch_graphs(const std::vector<Graph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("batch_graphs: empty graph list");
  const int fdim = graphs.front().feature_dim();
  std::size_t total = 0;
  for (const Graph& g : graphs) {
    if (g.feature_dim() != fdim)
      throw std::invalid_argument("batch_graphs: mismatched feature_dim");
    total += static_cast<std::size_t>(g.num_nodes);
  }

  GraphBatch b;
  b.batch_size = static_cast<int>(graphs.size());
  b.node_features = Tensor(total, static_cast<std::size_t>(fdim));
  b.node_to_graph.reserve(total);
  int offset = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    for (int i = 0; i < g.num_nodes; ++i) {
      b.node_to_graph.push_back(static_cast<int>(gi));
      for (int j = 0; j < fdim; ++j)
        b.node_features(static_cast<std::size_t>(offset + i), static_cast<std::size_t>(j)) =
            g.node_features(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    for (const auto& [u, v] : g.edges) {
      b.directed_edges.emplace_back(offset + u, offset + v);
      b.directed_edges.emplace_back(offset + v, offset + u);
    }
    offset += g.num_nodes;
  }
  return b;
}

bool graphs_equal(const Graph& a, const Graph& b) {
  if (a.num_nodes != b.num_nodes || a.label != b.label) return false;
  if (!(a.node_features == b.node_features)) return false;
  std::vector<std::pair<int, int>> ea, eb;
  ea.reserve(a.edges.size());
  eb.reserve(b.edges.size());
  for (const auto& e : a.edges) ea.push_back(normalized(e));
  for (const auto& e : b.edges) eb.push_back(normalized(e));
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb;
}

}  // namespace graphssl
