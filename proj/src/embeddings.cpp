#include "glp/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "glp/util.hpp"

namespace glp {

const std::vector<double>* EmbeddingProvider::lookup(const VerseId& verse, int pos,
                                                     const std::string& token) const {
  if (kind == Kind::ExternalToken) {
    auto it = by_token.find({verse, pos});
    return it == by_token.end() ? nullptr : &it->second;
  }
  auto it = by_type.find(token);
  return it == by_type.end() ? nullptr : &it->second;
}

const EmbeddingProvider& EmbeddingSet::at(const std::string& lang) const {
  auto it = per_lang.find(lang);
  if (it == per_lang.end()) fail_data("no embedding provider for language " + lang);
  return it->second;
}

void EmbeddingSet::insert(EmbeddingProvider provider) {
  if (per_lang.empty()) dim = provider.dim;
  if (provider.dim != dim)
    fail_data("embedding dimension mismatch: " + provider.lang + " has " +
              std::to_string(provider.dim) + ", set has " + std::to_string(dim));
  per_lang[provider.lang] = std::move(provider);
}

PpmiMatrix build_ppmi(const MultiParallelCorpus& corpus, const std::string& lang) {
  const auto& e = corpus.at(lang);
  PpmiMatrix m;
  long total = 0;
  std::map<std::string, long> word_count;
  std::map<VerseId, long> verse_count;
  for (const auto& [v, toks] : e.verses) {
    if (toks.empty()) continue;
    verse_count[v] = static_cast<long>(toks.size());
    total += static_cast<long>(toks.size());
    for (const auto& w : toks) word_count[w]++;
  }
  if (total == 0) fail_data("build_ppmi: language " + lang + " has no tokens");
  for (const auto& [w, c] : word_count) {
    (void)c;
    m.vocab.push_back(w);
  }
  for (const auto& [v, c] : verse_count) {
    (void)c;
    m.verse_ids.push_back(v);
  }
  std::map<std::string, int> widx;
  std::map<VerseId, int> vidx;
  for (size_t i = 0; i < m.vocab.size(); ++i) widx[m.vocab[i]] = static_cast<int>(i);
  for (size_t i = 0; i < m.verse_ids.size(); ++i) vidx[m.verse_ids[i]] = static_cast<int>(i);

  std::map<std::pair<int, int>, long> cooc;
  for (const auto& [v, toks] : e.verses) {
    if (toks.empty()) continue;
    int col = vidx[v];
    for (const auto& w : toks) cooc[{widx[w], col}]++;
  }
  m.rows.resize(m.vocab.size());
  double t = static_cast<double>(total);
  for (const auto& [key, c] : cooc) {
    double pmi = std::log(static_cast<double>(c) * t /
                          (static_cast<double>(word_count[m.vocab[static_cast<size_t>(key.first)]]) *
                           static_cast<double>(verse_count[m.verse_ids[static_cast<size_t>(key.second)]])));
    if (pmi > 0) m.rows[static_cast<size_t>(key.first)].emplace_back(key.second, pmi);
  }
  return m;
}

EmbeddingProvider train_sentence_id_embeddings(const PpmiMatrix& matrix, const std::string& lang,
                                               int dim, std::string* rank_warning) {
  if (dim <= 0) fail_usage("train_sentence_id_embeddings: dimension must be positive");
  int rows = static_cast<int>(matrix.vocab.size());
  int cols = static_cast<int>(matrix.verse_ids.size());
  if (rows == 0 || cols == 0) fail_data("train_sentence_id_embeddings: empty matrix");
  DMatrix a(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (const auto& [c, w] : matrix.rows[static_cast<size_t>(r)]) a.at(r, c) = w;
  SvdResult svd = jacobi_svd(a);
  int k = static_cast<int>(svd.sigma.size());
  double smax = k > 0 ? svd.sigma[0] : 0.0;
  int rank = 0;
  for (double s : svd.sigma)
    if (s > 1e-10 * std::max(1.0, smax)) ++rank;
  int effective = std::min(dim, rank);
  if (effective < dim && rank_warning)
    *rank_warning = "requested dimension " + std::to_string(dim) + " exceeds rank " +
                    std::to_string(rank) + " for " + lang + "; extra dimensions are zero";

  EmbeddingProvider p;
  p.lang = lang;
  p.kind = EmbeddingProvider::Kind::StaticType;
  p.dim = dim;
  for (int r = 0; r < rows; ++r) {
    std::vector<double> vec(static_cast<size_t>(dim), 0.0);
    for (int c = 0; c < effective && c < k; ++c)
      vec[static_cast<size_t>(c)] = svd.u.at(r, c) * std::sqrt(svd.sigma[static_cast<size_t>(c)]);
    p.by_type.emplace(matrix.vocab[static_cast<size_t>(r)], std::move(vec));
  }
  return p;
}

EmbeddingProvider load_external_vectors(const std::string& path, const std::string& lang) {
  EmbeddingProvider p;
  p.lang = lang;
  p.dim = -1;
  auto lines = read_lines(path);
  bool token_level = false, decided = false;
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    const std::string where = path + ":" + std::to_string(ln + 1);
    bool is_token = fields.size() == 3;
    if (!decided) {
      token_level = is_token;
      p.kind = token_level ? EmbeddingProvider::Kind::ExternalToken
                           : EmbeddingProvider::Kind::ExternalType;
      decided = true;
    } else if (is_token != token_level) {
      fail_data(where + ": mixed token-level and type-level lines");
    }
    const std::string& floats = fields.back();
    std::vector<double> vec;
    for (const auto& f : split_ws(floats)) vec.push_back(std::stod(f));
    if (p.dim < 0) p.dim = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != p.dim)
      fail_data(where + ": inconsistent dimension " + std::to_string(vec.size()) + " (expected " +
                std::to_string(p.dim) + ")");
    if (token_level) {
      if (fields.size() != 3) fail_data(where + ": expected VerseId\\tpos\\tfloats");
      p.by_token[{fields[0], std::stoi(fields[1])}] = std::move(vec);
    } else {
      if (fields.size() != 2) fail_data(where + ": expected token\\tfloats");
      p.by_type[fields[0]] = std::move(vec);
    }
  }
  if (p.dim < 0) fail_data(path + ": no vectors found");
  return p;
}

void write_type_vectors(const EmbeddingProvider& provider, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [tok, vec] : provider.by_type) {
    out << tok << '\t';
    for (size_t i = 0; i < vec.size(); ++i) {
      if (i) out << ' ';
      out << vec[i];
    }
    out << '\n';
  }
  write_file(path, out.str());
}

}  // namespace glp
