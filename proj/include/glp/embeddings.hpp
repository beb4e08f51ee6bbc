#pragma once

#include <map>
#include <string>
#include <vector>

#include "glp/corpus.hpp"
#include "glp/linalg.hpp"

namespace glp {

// Word vectors for one language.  Static (type-level) vectors come from
// the sentence-ID PPMI+SVD trainer; external vectors (e.g. pooled
// contextual embeddings) are imported from text files and may be keyed by
// type or by token occurrence (verse, position).
struct EmbeddingProvider {
  enum class Kind { StaticType, ExternalType, ExternalToken };

  std::string lang;
  Kind kind = Kind::StaticType;
  int dim = 0;
  std::map<std::string, std::vector<double>> by_type;
  std::map<std::pair<VerseId, int>, std::vector<double>> by_token;

  // nullptr = OOV; caller substitutes the fallback (zeros + flag)
  const std::vector<double>* lookup(const VerseId& verse, int pos, const std::string& token) const;
};

struct EmbeddingSet {
  int dim = 0;
  std::map<std::string, EmbeddingProvider> per_lang;

  const EmbeddingProvider& at(const std::string& lang) const;
  bool has(const std::string& lang) const { return per_lang.count(lang) > 0; }
  void insert(EmbeddingProvider provider);
};

struct PpmiMatrix {
  std::vector<std::string> vocab;     // sorted types, rows
  std::vector<VerseId> verse_ids;     // sorted, columns
  // sparse rows: (col, weight), sorted by col
  std::vector<std::vector<std::pair<int, double>>> rows;
};

// entry(w, v) = max(0, log(count(w,v) * T / (count(w) * count(v)))),
// T = total token count of the language.
PpmiMatrix build_ppmi(const MultiParallelCorpus& corpus, const std::string& lang);

// Rank-D truncated SVD of the PPMI matrix; word vectors U_D * Sigma_D^(1/2).
// If D exceeds the effective rank the extra dimensions are zero (warned via
// *rank_warning); width stays D so feature tables keep a fixed layout.
EmbeddingProvider train_sentence_id_embeddings(const PpmiMatrix& matrix, const std::string& lang,
                                               int dim, std::string* rank_warning = nullptr);

// "token\tf f f ..." (type level) or "VerseId\tpos\tf f f ..." (token level).
EmbeddingProvider load_external_vectors(const std::string& path, const std::string& lang);

void write_type_vectors(const EmbeddingProvider& provider, const std::string& path);

}  // namespace glp
