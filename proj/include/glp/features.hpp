#pragma once

#include <vector>

#include "glp/embeddings.hpp"
#include "glp/graph_algo.hpp"
#include "glp/mag.hpp"

namespace glp {

struct FeatureConfig {
  int c_max = 16;    // community ordinal cap
  int p_max = 256;   // position index cap
  uint64_t lp_seed = 1;
  std::vector<std::string> languages;  // global list; defines lang_index
};

struct CommunityAssignment {
  std::vector<int> greedy_ordinal;  // per node, capped at c_max
  std::vector<int> lp_ordinal;
};

// Per-node structural + lexical features of one verse graph.  Categorical
// columns stay integer; the model embeds them with learned tables.
struct NodeFeatureTable {
  int word_dim = 0;
  std::vector<std::string> languages;        // global language list (lang_index domain)
  std::vector<CentralityVector> centrality;  // n
  std::vector<int> community_greedy;         // n
  std::vector<int> community_lp;             // n
  std::vector<int> lang_index;               // n, into FeatureConfig::languages
  std::vector<int> position_index;           // n, min(pos, p_max - 1)
  std::vector<double> word_vec;              // n * word_dim
  std::vector<uint8_t> oov;                  // n

  int num_nodes() const { return static_cast<int>(centrality.size()); }
};

SimpleGraph mag_graph(const Mag& g);

std::vector<CentralityVector> compute_centralities(const Mag& g);
CommunityAssignment detect_communities(const Mag& g, int c_max, uint64_t seed);

NodeFeatureTable assemble_node_features(const Mag& g, const std::vector<CentralityVector>& cent,
                                        const CommunityAssignment& comm,
                                        const EmbeddingSet& embeddings,
                                        const FeatureConfig& config);

// Full pipeline over all verse graphs, parallel over verses.
std::vector<NodeFeatureTable> build_features(const std::vector<Mag>& mags,
                                             const EmbeddingSet& embeddings,
                                             const FeatureConfig& config);

// Serial reference for the parallel driver (kept for testing/benchmarks).
std::vector<NodeFeatureTable> build_features_serial(const std::vector<Mag>& mags,
                                                    const EmbeddingSet& embeddings,
                                                    const FeatureConfig& config);

void dump_features(const std::vector<Mag>& mags, const std::vector<NodeFeatureTable>& tables,
                   const std::string& path);

}  // namespace glp
