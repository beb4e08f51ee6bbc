#include "glp/mag.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "glp/parallel.hpp"
#include "glp/util.hpp"

namespace glp {

int Mag::lang_of(int node) const {
  auto it = std::upper_bound(node_offset.begin(), node_offset.end(), node);
  return static_cast<int>(it - node_offset.begin()) - 1;
}

Mag build_mag(const MultiParallelCorpus& corpus, const AlignmentSet& alignments,
              const VerseId& verse) {
  Mag g;
  g.verse = verse;
  for (const auto& e : corpus.editions) {
    auto it = e.verses.find(verse);
    if (it == e.verses.end() || it->second.empty()) continue;
    g.langs.push_back(e.lang);
    g.roles.push_back(e.role);
    g.node_offset.push_back(g.num_nodes());
    g.token_counts.push_back(static_cast<int>(it->second.size()));
    for (const auto& tok : it->second) g.tokens.push_back(tok);
    bool labeled = e.role == Role::Source || e.role == Role::Dev;
    auto itt = e.tags.find(verse);
    if (labeled) {
      if (itt == e.tags.end())
        fail_data("build_mag: " + role_name(e.role) + " language " + e.lang +
                  " has no tags for verse " + verse);
      for (Upos t : itt->second) {
        if (t == Upos::Null)
          fail_data("build_mag: NULL tag on " + role_name(e.role) + " node in verse " + verse);
        g.labels.push_back(static_cast<int8_t>(tag_index(t)));
      }
    } else {
      for (size_t k = 0; k < it->second.size(); ++k) g.labels.push_back(-1);
    }
  }

  auto lang_idx = [&](const std::string& lang) {
    for (size_t i = 0; i < g.langs.size(); ++i)
      if (g.langs[i] == lang) return static_cast<int>(i);
    return -1;
  };

  for (const auto& [pair, verses] : alignments.links) {
    int la = lang_idx(pair.a);
    int lb = lang_idx(pair.b);
    if (la < 0 || lb < 0) continue;
    auto itv = verses.find(verse);
    if (itv == verses.end()) continue;
    for (const auto& [i, j] : itv->second) {
      if (i < 0 || i >= g.token_counts[static_cast<size_t>(la)] || j < 0 ||
          j >= g.token_counts[static_cast<size_t>(lb)])
        fail_data("build_mag: alignment index out of bounds in verse " + verse + ", pair " +
                  pair.a + "-" + pair.b + ", link " + std::to_string(i) + "-" +
                  std::to_string(j));
      int na = g.node_id(la, i);
      int nb = g.node_id(lb, j);
      g.edges.emplace_back(std::min(na, nb), std::max(na, nb));
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

std::vector<Mag> build_mags(const MultiParallelCorpus& corpus, const AlignmentSet& alignments) {
  std::vector<VerseId> keep;
  for (const auto& v : corpus.all_verses()) {
    bool nonempty = false;
    for (const auto& e : corpus.editions) {
      auto it = e.verses.find(v);
      if (it != e.verses.end() && !it->second.empty()) {
        nonempty = true;
        break;
      }
    }
    if (nonempty) keep.push_back(v);
  }
  std::vector<Mag> mags(keep.size());
  par::for_each(static_cast<int>(keep.size()), [&](int k) {
    mags[static_cast<size_t>(k)] = build_mag(corpus, alignments, keep[static_cast<size_t>(k)]);
  });
  return mags;
}

MagDiagnostics validate_mag(const Mag& g) {
  MagDiagnostics d;
  d.verse = g.verse;
  d.nodes = g.num_nodes();
  d.edges = static_cast<int>(g.edges.size());
  std::vector<int> degree(static_cast<size_t>(g.num_nodes()), 0);
  for (const auto& [a, b] : g.edges) {
    degree[static_cast<size_t>(a)]++;
    degree[static_cast<size_t>(b)]++;
    if (g.lang_of(a) == g.lang_of(b)) {
      d.cross_language_only = false;
      d.violations.push_back("intra-language edge " + std::to_string(a) + "-" +
                             std::to_string(b) + " (" + g.langs[static_cast<size_t>(g.lang_of(a))] +
                             ")");
    }
  }
  for (int v = 0; v < g.num_nodes(); ++v)
    if (degree[static_cast<size_t>(v)] == 0) d.isolated_nodes++;
  for (size_t li = 0; li < g.langs.size(); ++li) {
    std::vector<int> hist;
    for (int p = 0; p < g.token_counts[li]; ++p) {
      int deg = degree[static_cast<size_t>(g.node_id(static_cast<int>(li), p))];
      if (deg >= static_cast<int>(hist.size())) hist.resize(static_cast<size_t>(deg) + 1, 0);
      hist[static_cast<size_t>(deg)]++;
    }
    d.degree_histogram.emplace_back(g.langs[li], std::move(hist));
  }
  return d;
}

void dump_mag(const Mag& g, std::ostream& out) {
  out << "verse " << g.verse << '\n';
  for (int v = 0; v < g.num_nodes(); ++v) {
    int li = g.lang_of(v);
    out << "node " << g.langs[static_cast<size_t>(li)] << ' ' << g.pos_of(v);
    if (g.labels[static_cast<size_t>(v)] >= 0)
      out << ' ' << to_string(tag_from_index(g.labels[static_cast<size_t>(v)]));
    out << '\n';
  }
  for (const auto& [a, b] : g.edges) out << "edge " << a << ' ' << b << '\n';
}

void dump_mags(const std::vector<Mag>& mags, const std::string& path) {
  std::ostringstream out;
  for (const auto& g : mags) dump_mag(g, out);
  write_file(path, out.str());
}

}  // namespace glp
