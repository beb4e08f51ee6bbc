#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "glp/corpus.hpp"

namespace glp {

// IBM Model 1 translation table for a directed language pair: t(target
// word | source word), with a virtual NULL source type at row 0.
struct TranslationTable {
  std::string src_lang, tgt_lang;
  std::vector<std::string> src_vocab;  // sorted types; row index = vocab index + 1
  std::vector<std::string> tgt_vocab;  // sorted types
  // rows[0] is the NULL source; rows[i+1] belongs to src_vocab[i].
  // Each row holds (tgt index, prob) sorted by tgt index; missing = 0.
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> log_likelihood;  // one entry per completed EM iteration

  int src_index(const std::string& w) const;  // -1 if unknown (NULL row is 0 internally)
  int tgt_index(const std::string& w) const;
  double prob(int src_row, int tgt_idx) const;
  double row_sum(int src_row) const;
};

inline constexpr const char* kNullToken = "<NULL>";

// Undirected, canonically ordered language pair.
struct LangPair {
  std::string a, b;
  LangPair() = default;
  LangPair(std::string x, std::string y);
  bool operator<(const LangPair& o) const { return std::tie(a, b) < std::tie(o.a, o.b); }
  bool operator==(const LangPair& o) const { return a == o.a && b == o.b; }
};

// Alignment links in canonical orientation: (i, j) = (token index in
// pair.a, token index in pair.b).  Link vectors are sorted and unique.
struct AlignmentSet {
  std::map<LangPair, std::map<VerseId, std::vector<std::pair<int, int>>>> links;
  std::string direction;  // metadata: "a->b", "b->a", "intersection", "import", "gold"

  void add(const LangPair& pair, const VerseId& verse, int i, int j);
  void normalize();  // sort + dedup all link vectors
};

// EM estimation of t(tgt|src) over all verses shared by the pair.
// iterations >= 1; records corpus log-likelihood after each iteration.
TranslationTable train_ibm1(const MultiParallelCorpus& corpus, const std::string& src_lang,
                            const std::string& tgt_lang, int iterations);

// Per-target-token argmax decode.  The NULL source competes and wins ties,
// so tokens with no evidence produce no link.  Canonical orientation.
AlignmentSet align_pair(const TranslationTable& table, const MultiParallelCorpus& corpus);

// links(result) = links(forward) intersect links(backward), both in
// canonical orientation already.
AlignmentSet symmetrize_intersection(const AlignmentSet& forward, const AlignmentSet& backward);

// Convenience: train both directions, decode, intersect.
AlignmentSet align_language_pair(const MultiParallelCorpus& corpus, const std::string& a,
                                 const std::string& b, int iterations);

// Pharaoh interchange: lines "VerseId\ti-j i-j ...".
AlignmentSet read_pharaoh(const std::string& path, const LangPair& pair);
void write_pharaoh(const AlignmentSet& set, const LangPair& pair, const std::string& path);

// Text persistence "source\ttarget\tprob", sorted, NULL row spelled <NULL>.
void write_translation_table(const TranslationTable& table, const std::string& path);

}  // namespace glp
