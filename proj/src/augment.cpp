#include "graphssl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace graphssl {

namespace {

void check_ratio(double ratio) {
  if (ratio < 0.0 || ratio >= 1.0)
    throw std::invalid_argument("augment: ratio must lie in [0, 1)");
}

// First m entries of a seeded permutation of 0..n-1.
std::vector<int> sample_without_replacement(int n, int m, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  idx.resize(static_cast<std::size_t>(m));
  return idx;
}

std::vector<std::vector<int>> adjacency(const Graph& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.num_nodes));
  for (const auto& [u, v] : g.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  return adj;
}

}  // namespace

Graph node_drop(const Graph& g, double ratio, Rng& rng) {
  check_ratio(ratio);
  const int drop = static_cast<int>(std::floor(ratio * g.num_nodes));
  if (drop == 0) return g;
  std::vector<int> perm(static_cast<std::size_t>(g.num_nodes));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<int> keep(perm.begin() + drop, perm.end());
  return induced_subgraph(g, keep);
}

Graph subgraph_walk(const Graph& g, double ratio, Rng& rng) {
  check_ratio(ratio);
  const int n = g.num_nodes;
  const int k = static_cast<int>(std::ceil((1.0 - ratio) * n));
  if (k >= n) return g;

  const auto adj = adjacency(g);
  std::vector<bool> visited(static_cast<std::size_t>(n), false);
  std::vector<int> order;
  int current = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(n)));
  visited[static_cast<std::size_t>(current)] = true;
  order.push_back(current);

  while (static_cast<int>(order.size()) < k) {
    std::vector<int> candidates;
    for (int nb : adj[static_cast<std::size_t>(current)])
      if (!visited[static_cast<std::size_t>(nb)]) candidates.push_back(nb);
    if (candidates.empty()) {
      // Frontier of the visited set, in ascending node order for determinism.
      for (int v : order)
        for (int nb : adj[static_cast<std::size_t>(v)])
          if (!visited[static_cast<std::size_t>(nb)]) candidates.push_back(nb);
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }
    if (candidates.empty()) {
      // Stalled: component exhausted, restart anywhere unvisited.
      for (int v = 0; v < n; ++v)
        if (!visited[static_cast<std::size_t>(v)]) candidates.push_back(v);
    }
    current = candidates[rng.uniform(candidates.size())];
    visited[static_cast<std::size_t>(current)] = true;
    order.push_back(current);
  }
  return induced_subgraph(g, order);
}

Graph edge_perturb(const Graph& g, double ratio, Rng& rng) {
  check_ratio(ratio);
  const int e = g.num_edges();
  const int m = static_cast<int>(std::floor(ratio * e));
  if (m == 0) return g;

  std::vector<int> removed_idx = sample_without_replacement(e, m, rng);
  std::vector<bool> removed(static_cast<std::size_t>(e), false);
  for (int i : removed_idx) removed[static_cast<std::size_t>(i)] = true;

  std::set<std::pair<int, int>> existing;
  for (const auto& [u, v] : g.edges) existing.insert({std::min(u, v), std::max(u, v)});

  // Complement of the original edge set, ascending pair order.
  std::vector<std::pair<int, int>> complement;
  for (int u = 0; u < g.num_nodes; ++u)
    for (int v = u + 1; v < g.num_nodes; ++v)
      if (!existing.count({u, v})) complement.emplace_back(u, v);

  Graph out = g;
  out.edges.clear();
  for (int i = 0; i < e; ++i)
    if (!removed[static_cast<std::size_t>(i)]) out.edges.push_back(g.edges[static_cast<std::size_t>(i)]);

  const int adds = std::min<int>(m, static_cast<int>(complement.size()));
  if (adds > 0) {
    std::vector<int> pick = sample_without_replacement(static_cast<int>(complement.size()), adds, rng);
    std::sort(pick.begin(), pick.end());
    for (int i : pick) out.edges.push_back(complement[static_cast<std::size_t>(i)]);
  }
  return out;
}

Graph attr_mask(const Graph& g, double ratio, Rng& rng) {
  check_ratio(ratio);
  const int m = static_cast<int>(std::floor(ratio * g.num_nodes));
  if (m == 0) return g;
  Graph out = g;
  for (int i : sample_without_replacement(g.num_nodes, m, rng))
    for (std::size_t j = 0; j < out.node_features.cols(); ++j)
      out.node_features(static_cast<std::size_t>(i), j) = 0.0;
  return out;
}

Graph apply_augment(const Graph& g, const AugmentSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case AugmentKind::NodeDrop:
      return node_drop(g, spec.ratio, rng);
    case AugmentKind::Subgraph:
      return subgraph_walk(g, spec.ratio, rng);
    case AugmentKind::EdgePerturb:
      return edge_perturb(g, spec.ratio, rng);
    case AugmentKind::AttrMask:
      return attr_mask(g, spec.ratio, rng);
    case AugmentKind::Identity:
      return g;
  }
  throw std::logic_error("apply_augment: unknown kind");
}

std::pair<Graph, Graph> sample_view_pair(const Graph& g, const AugmentPool& pool, Rng& rng) {
  if (pool.specs.empty()) throw std::invalid_argument("sample_view_pair: empty pool");
  const AugmentSpec& sa = pool.specs[rng.uniform(pool.specs.size())];
  const AugmentSpec& sb = pool.specs[rng.uniform(pool.specs.size())];
  Rng ra = rng.fork(0);
  Rng rb = rng.fork(1);
  return {apply_augment(g, sa, ra), apply_augment(g, sb, rb)};
}

std::string augment_kind_name(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::NodeDrop:
      return "node-drop";
    case AugmentKind::Subgraph:
      return "subgraph";
    case AugmentKind::EdgePerturb:
      return "edge-perturb";
    case AugmentKind::AttrMask:
      return "attr-mask";
    case AugmentKind::Identity:
      return "identity";
  }
  throw std::logic_error("augment_kind_name: unknown kind");
}

AugmentKind augment_kind_from_name(const std::string& name) {
  if (name == "node-drop" || name == "nodedrop") return AugmentKind::NodeDrop;
  if (name == "subgraph") return AugmentKind::Subgraph;
  if (name == "edge-perturb" || name == "edgeperturb") return AugmentKind::EdgePerturb;
  if (name == "attr-mask" || name == "attrmask") return AugmentKind::AttrMask;
  if (name == "identity") return AugmentKind::Identity;
  throw std::invalid_argument("unknown augmentation: " + name);
}

}  // namespace graphssl
