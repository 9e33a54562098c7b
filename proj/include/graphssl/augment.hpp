#pragma once

#include <string>
#include <vector>

#include "graphssl/graph.hpp"
#include "graphssl/rng.hpp"

namespace graphssl {

enum class AugmentKind { NodeDrop, Subgraph, EdgePerturb, AttrMask, Identity };

struct AugmentSpec {
  AugmentKind kind = AugmentKind::Identity;
  double ratio = 0.0;  // in [0, 1); ignored by Identity
};

struct AugmentPool {
  std::vector<AugmentSpec> specs;  // nonempty
};

// Drops floor(ratio*n) nodes chosen uniformly without replacement; at least
// one node survives. Result is the induced subgraph on the survivors.
Graph node_drop(const Graph& g, double ratio, Rng& rng);

// Keeps k = ceil((1-ratio)*n) nodes collected by a random walk from a uniform
// start. When the walk has no unvisited neighbor it jumps to a uniform node
// on the unvisited frontier of the visited set; when the frontier is empty
// (component exhausted) it restarts from a uniform unvisited node.
Graph subgraph_walk(const Graph& g, double ratio, Rng& rng);

// Removes m = floor(ratio*|E|) uniform edges and adds m uniform new edges
// among pairs non-adjacent in the input (skipped when the complement runs
// out). Node set and features unchanged.
Graph edge_perturb(const Graph& g, double ratio, Rng& rng);

// Zeroes the feature rows of floor(ratio*n) uniformly chosen nodes.
Graph attr_mask(const Graph& g, double ratio, Rng& rng);

Graph apply_augment(const Graph& g, const AugmentSpec& spec, Rng& rng);

// Draws two specs independently and uniformly from the pool (they may
// coincide) and applies each with an independent stream forked from rng.
std::pair<Graph, Graph> sample_view_pair(const Graph& g, const AugmentPool& pool, Rng& rng);

std::string augment_kind_name(AugmentKind kind);
AugmentKind augment_kind_from_name(const std::string& name);

}  // namespace graphssl
