#include "glp/features.hpp"

#include <algorithm>
#include <sstream>

#include "glp/parallel.hpp"
#include "glp/util.hpp"

namespace glp {

SimpleGraph mag_graph(const Mag& g) { return SimpleGraph(g.num_nodes(), g.edges); }

std::vector<CentralityVector> compute_centralities(const Mag& g) {
  return centralities(mag_graph(g));
}

CommunityAssignment detect_communities(const Mag& g, int c_max, uint64_t seed) {
  SimpleGraph sg = mag_graph(g);
  CommunityAssignment out;
  out.greedy_ordinal = community_ordinals(greedy_modularity_communities(sg), c_max);
  // per-verse stream so results do not depend on verse processing order
  uint64_t verse_seed = mix_seed(seed, g.verse);
  out.lp_ordinal = community_ordinals(label_propagation_communities(sg, verse_seed), c_max);
  return out;
}

NodeFeatureTable assemble_node_features(const Mag& g, const std::vector<CentralityVector>& cent,
                                        const CommunityAssignment& comm,
                                        const EmbeddingSet& embeddings,
                                        const FeatureConfig& config) {
  int n = g.num_nodes();
  NodeFeatureTable t;
  t.word_dim = embeddings.dim;
  t.languages = config.languages;
  t.centrality = cent;
  t.community_greedy = comm.greedy_ordinal;
  t.community_lp = comm.lp_ordinal;
  t.lang_index.resize(static_cast<size_t>(n));
  t.position_index.resize(static_cast<size_t>(n));
  t.word_vec.assign(static_cast<size_t>(n) * embeddings.dim, 0.0);
  t.oov.assign(static_cast<size_t>(n), 0);

  for (int v = 0; v < n; ++v) {
    int li = g.lang_of(v);
    const std::string& lang = g.langs[static_cast<size_t>(li)];
    int global = -1;
    for (size_t i = 0; i < config.languages.size(); ++i)
      if (config.languages[i] == lang) global = static_cast<int>(i);
    if (global < 0) fail_data("assemble_node_features: language " + lang + " not in config");
    t.lang_index[static_cast<size_t>(v)] = global;
    int pos = g.pos_of(v);
    t.position_index[static_cast<size_t>(v)] = std::min(pos, config.p_max - 1);
    const auto& provider = embeddings.at(lang);
    const auto* vec = provider.lookup(g.verse, pos, g.tokens[static_cast<size_t>(v)]);
    if (vec) {
      std::copy(vec->begin(), vec->end(),
                t.word_vec.begin() + static_cast<long>(v) * embeddings.dim);
    } else {
      t.oov[static_cast<size_t>(v)] = 1;  // fallback: zeros + flag
    }
  }
  return t;
}

std::vector<NodeFeatureTable> build_features(const std::vector<Mag>& mags,
                                             const EmbeddingSet& embeddings,
                                             const FeatureConfig& config) {
  std::vector<NodeFeatureTable> out(mags.size());
  par::for_each(static_cast<int>(mags.size()), [&](int k) {
    const Mag& g = mags[static_cast<size_t>(k)];
    auto cent = compute_centralities(g);
    auto comm = detect_communities(g, config.c_max, config.lp_seed);
    out[static_cast<size_t>(k)] = assemble_node_features(g, cent, comm, embeddings, config);
  });
  return out;
}

std::vector<NodeFeatureTable> build_features_serial(const std::vector<Mag>& mags,
                                                    const EmbeddingSet& embeddings,
                                                    const FeatureConfig& config) {
  std::vector<NodeFeatureTable> out;
  out.reserve(mags.size());
  for (const auto& g : mags) {
    auto cent = compute_centralities(g);
    auto comm = detect_communities(g, config.c_max, config.lp_seed);
    out.push_back(assemble_node_features(g, cent, comm, embeddings, config));
  }
  return out;
}

void dump_features(const std::vector<Mag>& mags, const std::vector<NodeFeatureTable>& tables,
                   const std::string& path) {
  std::ostringstream out;
  out.precision(12);
  out << "verse\tlang\tpos\tdegree\tcloseness\tbetweenness\tload\tharmonic\tcomm_greedy\t"
         "comm_lp\tlang_idx\tpos_idx\toov\tword_vec\n";
  for (size_t k = 0; k < mags.size(); ++k) {
    const Mag& g = mags[k];
    const NodeFeatureTable& t = tables[k];
    for (int v = 0; v < g.num_nodes(); ++v) {
      const auto& c = t.centrality[static_cast<size_t>(v)];
      out << g.verse << '\t' << g.langs[static_cast<size_t>(g.lang_of(v))] << '\t' << g.pos_of(v)
          << '\t' << c.degree << '\t' << c.closeness << '\t' << c.betweenness << '\t' << c.load
          << '\t' << c.harmonic << '\t' << t.community_greedy[static_cast<size_t>(v)] << '\t'
          << t.community_lp[static_cast<size_t>(v)] << '\t' << t.lang_index[static_cast<size_t>(v)]
          << '\t' << t.position_index[static_cast<size_t>(v)] << '\t'
          << static_cast<int>(t.oov[static_cast<size_t>(v)]);
      for (int d = 0; d < t.word_dim; ++d)
        out << (d == 0 ? '\t' : ' ') << t.word_vec[static_cast<size_t>(v) * t.word_dim + d];
      out << '\n';
    }
  }
  write_file(path, out.str());
}

}  // namespace glp
