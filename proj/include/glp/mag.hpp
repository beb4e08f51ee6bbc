#pragma once

#include <string>
#include <vector>

#include "glp/alignment.hpp"
#include "glp/corpus.hpp"

namespace glp {

// Multilingual alignment graph of one verse: nodes are word tokens across
// all language versions, edges are symmetrized alignment links.  Node ids
// are flat: languages in corpus order, tokens by position.

struct Mag {
  VerseId verse;
  std::vector<std::string> langs;       // languages present with >= 1 token, corpus order
  std::vector<Role> roles;              // per language
  std::vector<int> token_counts;        // per language
  std::vector<int> node_offset;         // per language, prefix sums
  std::vector<std::string> tokens;      // per node
  std::vector<std::pair<int, int>> edges;  // (a < b), sorted, deduplicated
  std::vector<int8_t> labels;           // per node: tag index, -1 = unlabeled

  int num_nodes() const { return static_cast<int>(tokens.size()); }
  int node_id(int lang_idx, int pos) const { return node_offset[static_cast<size_t>(lang_idx)] + pos; }
  int lang_of(int node) const;
  int pos_of(int node) const { return node - node_offset[static_cast<size_t>(lang_of(node))]; }
};

// Builds the graph for one verse.  Labels are copied from source and dev
// editions; alignment indices are bounds-checked here.
Mag build_mag(const MultiParallelCorpus& corpus, const AlignmentSet& alignments,
              const VerseId& verse);

// All non-empty verses, sorted by id, in parallel.
std::vector<Mag> build_mags(const MultiParallelCorpus& corpus, const AlignmentSet& alignments);

struct MagDiagnostics {
  VerseId verse;
  int nodes = 0;
  int edges = 0;
  int isolated_nodes = 0;
  std::vector<std::pair<std::string, std::vector<int>>> degree_histogram;  // per lang
  bool cross_language_only = true;
  std::vector<std::string> violations;
};

MagDiagnostics validate_mag(const Mag& g);

// Debug dump: "node <lang> <pos> [label]" and "edge <a> <b>" per verse.
void dump_mag(const Mag& g, std::ostream& out);
void dump_mags(const std::vector<Mag>& mags, const std::string& path);

}  // namespace glp
