#pragma once

#include <cstdint>
#include <vector>

namespace glp {

// Undirected simple graph as adjacency lists; shared by the centrality and
// community kernels and by the test oracles.
struct SimpleGraph {
  int n = 0;
  std::vector<std::vector<int>> adj;

  SimpleGraph() = default;
  SimpleGraph(int nodes, const std::vector<std::pair<int, int>>& edges);
  int num_edges() const;
};

struct CentralityVector {
  double degree = 0, closeness = 0, betweenness = 0, load = 0, harmonic = 0;
};

// All five centralities, normalized to [0,1]:
//   degree     deg(v)/(n-1)
//   closeness  Wasserman-Faust: ((r-1)/sum d) * ((r-1)/(n-1)), r = component size
//   betweenness Brandes pair dependencies / ((n-1)(n-2)), 0 for n <= 2
//   load       shortest-path flow splitting / ((n-1)(n-2)), 0 for n <= 2
//   harmonic   sum of 1/d over reachable nodes / (n-1)
std::vector<CentralityVector> centralities(const SimpleGraph& g);

// Agglomerative greedy modularity (merge the pair with the largest gain
// while the best gain is positive); returns one community id per node.
std::vector<int> greedy_modularity_communities(const SimpleGraph& g);

// Semi-synchronous label propagation on a graph-coloring schedule; most
// frequent neighbor label, ties to the smallest label; at most
// `max_sweeps` sweeps.  `sweeps_used` reports convergence.
std::vector<int> label_propagation_communities(const SimpleGraph& g, uint64_t seed,
                                               int max_sweeps = 100, int* sweeps_used = nullptr);

double modularity(const SimpleGraph& g, const std::vector<int>& communities);

// Community ids -> ordinals by (size desc, smallest node id), capped at c_max.
std::vector<int> community_ordinals(const std::vector<int>& communities, int c_max);

}  // namespace glp
