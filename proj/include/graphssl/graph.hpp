#pragma once

#include <string>
#include <utility>
#include <vector>

#include "graphssl/tensor.hpp"

namespace graphssl {

// Immutable attributed graph. Undirected edges are stored once; message
// passing expands them to both directions at batching time.
struct Graph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, no self-loops, no duplicates
  Tensor node_features;                    // num_nodes x feature_dim
  int label = 0;

  int feature_dim() const { return static_cast<int>(node_features.cols()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

// Disjoint union of graphs; node indices are offset per graph and each
// undirected edge appears in both directions.
struct GraphBatch {
  Tensor node_features;  // N_total x feature_dim
  std::vector<std::pair<int, int>> directed_edges;
  std::vector<int> node_to_graph;  // non-decreasing, surjective onto [0, batch_size)
  int batch_size = 0;

  int num_nodes() const { return static_cast<int>(node_to_graph.size()); }
};

struct Dataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  int feature_dim = 0;
  std::string name;

  std::size_t size() const { return graphs.size(); }
};

struct ValidationReport {
  bool ok = true;
  std::string message;  // first violation, with location
};

// Checks every Graph invariant: endpoints in range, no self-loops, no
// duplicate undirected edges, feature row count.
ValidationReport validate(const Graph& g);

// Subgraph induced on `keep`. Nodes are relabeled densely 0..|keep|-1
// preserving ascending original order; duplicates in `keep` are ignored.
Graph induced_subgraph(const Graph& g, const std::vector<int>& keep);

// Disjoint union. Requires a nonempty list with uniform feature_dim.
GraphBatch batch_graphs(const std::vector<Graph>& graphs);

// Structural + feature equality (edge order insensitive).
bool graphs_equal(const Graph& a, const Graph& b);

}  // namespace graphssl
