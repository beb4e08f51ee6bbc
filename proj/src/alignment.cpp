#include "glp/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "glp/parallel.hpp"
#include "glp/util.hpp"

namespace glp {

LangPair::LangPair(std::string x, std::string y) {
  if (x == y) fail_usage("language pair needs two distinct languages, got " + x);
  if (x < y) {
    a = std::move(x);
    b = std::move(y);
  } else {
    a = std::move(y);
    b = std::move(x);
  }
}

int TranslationTable::src_index(const std::string& w) const {
  auto it = std::lower_bound(src_vocab.begin(), src_vocab.end(), w);
  if (it == src_vocab.end() || *it != w) return -1;
  return static_cast<int>(it - src_vocab.begin());
}

int TranslationTable::tgt_index(const std::string& w) const {
  auto it = std::lower_bound(tgt_vocab.begin(), tgt_vocab.end(), w);
  if (it == tgt_vocab.end() || *it != w) return -1;
  return static_cast<int>(it - tgt_vocab.begin());
}

double TranslationTable::prob(int src_row, int tgt_idx) const {
  if (src_row < 0 || tgt_idx < 0) return 0.0;
  const auto& row = rows[static_cast<size_t>(src_row)];
  auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(tgt_idx, -1.0));
  if (it == row.end() || it->first != tgt_idx) return 0.0;
  return it->second;
}

double TranslationTable::row_sum(int src_row) const {
  double s = 0;
  for (const auto& [t, p] : rows[static_cast<size_t>(src_row)]) {
    (void)t;
    s += p;
  }
  return s;
}

void AlignmentSet::add(const LangPair& pair, const VerseId& verse, int i, int j) {
  links[pair][verse].emplace_back(i, j);
}

void AlignmentSet::normalize() {
  for (auto& [pair, verses] : links) {
    (void)pair;
    for (auto& [v, vec] : verses) {
      (void)v;
      std::sort(vec.begin(), vec.end());
      vec.erase(std::unique(vec.begin(), vec.end()), vec.end());
    }
  }
}

namespace {

struct PairCorpus {
  // token index sequences per shared verse, in sorted verse order
  std::vector<VerseId> verses;
  std::vector<std::vector<int>> src;  // indices into src_vocab
  std::vector<std::vector<int>> tgt;
};

PairCorpus index_pair(const MultiParallelCorpus& corpus, const std::string& src_lang,
                      const std::string& tgt_lang, std::vector<std::string>& src_vocab,
                      std::vector<std::string>& tgt_vocab) {
  const auto& es = corpus.at(src_lang);
  const auto& et = corpus.at(tgt_lang);
  auto shared = corpus.shared_verses(src_lang, tgt_lang);
  if (shared.empty())
    fail_data("no shared verses for pair " + src_lang + "-" + tgt_lang);
  std::set<std::string> sv, tv;
  for (const auto& v : shared) {
    for (const auto& w : es.verses.at(v)) sv.insert(w);
    for (const auto& w : et.verses.at(v)) tv.insert(w);
  }
  src_vocab.assign(sv.begin(), sv.end());
  tgt_vocab.assign(tv.begin(), tv.end());
  auto index_of = [](const std::vector<std::string>& vocab, const std::string& w) {
    return static_cast<int>(std::lower_bound(vocab.begin(), vocab.end(), w) - vocab.begin());
  };
  PairCorpus pc;
  pc.verses = shared;
  pc.src.resize(shared.size());
  pc.tgt.resize(shared.size());
  for (size_t k = 0; k < shared.size(); ++k) {
    for (const auto& w : es.verses.at(shared[k])) pc.src[k].push_back(index_of(src_vocab, w));
    for (const auto& w : et.verses.at(shared[k])) pc.tgt[k].push_back(index_of(tgt_vocab, w));
  }
  return pc;
}

}  // namespace

TranslationTable train_ibm1(const MultiParallelCorpus& corpus, const std::string& src_lang,
                            const std::string& tgt_lang, int iterations) {
  if (iterations < 1) fail_usage("train_ibm1: iterations must be >= 1");
  TranslationTable table;
  table.src_lang = src_lang;
  table.tgt_lang = tgt_lang;
  PairCorpus pc = index_pair(corpus, src_lang, tgt_lang, table.src_vocab, table.tgt_vocab);

  int nsrc = static_cast<int>(table.src_vocab.size()) + 1;  // row 0 = NULL
  int ntgt = static_cast<int>(table.tgt_vocab.size());
  int nverses = static_cast<int>(pc.verses.size());
  double uniform_p = 1.0 / ntgt;

  // dense t and counts; desk-scale vocabularies keep this small
  std::vector<std::vector<double>> t(static_cast<size_t>(nsrc),
                                     std::vector<double>(static_cast<size_t>(ntgt), uniform_p));

  constexpr int kChunk = 256;
  struct Acc {
    std::vector<std::vector<double>> counts;
    double ll = 0;
  };

  for (int iter = 0; iter < iterations; ++iter) {
    auto map_chunk = [&](int lo, int hi) {
      Acc acc;
      acc.counts.assign(static_cast<size_t>(nsrc),
                        std::vector<double>(static_cast<size_t>(ntgt), 0.0));
      for (int k = lo; k < hi; ++k) {
        const auto& src = pc.src[static_cast<size_t>(k)];
        const auto& tgt = pc.tgt[static_cast<size_t>(k)];
        for (int j : tgt) {
          double denom = t[0][static_cast<size_t>(j)];
          for (int i : src) denom += t[static_cast<size_t>(i + 1)][static_cast<size_t>(j)];
          if (denom <= 0) continue;
          double inv = 1.0 / denom;
          acc.counts[0][static_cast<size_t>(j)] += t[0][static_cast<size_t>(j)] * inv;
          for (int i : src) {
            size_t row = static_cast<size_t>(i + 1);
            acc.counts[row][static_cast<size_t>(j)] += t[row][static_cast<size_t>(j)] * inv;
          }
        }
      }
      return acc;
    };
    auto merge = [&](Acc& into, const Acc& part) {
      if (into.counts.empty()) {
        into = part;
        return;
      }
      for (size_t r = 0; r < into.counts.size(); ++r)
        for (size_t c = 0; c < into.counts[r].size(); ++c)
          into.counts[r][c] += part.counts[r][c];
    };
    Acc total = par::chunk_reduce(nverses, kChunk, Acc{}, map_chunk, merge);

    // M-step
    for (int r = 0; r < nsrc; ++r) {
      double sum = 0;
      for (double c : total.counts[static_cast<size_t>(r)]) sum += c;
      if (sum <= 0) fail_internal("train_ibm1: empty count row");
      double inv = 1.0 / sum;
      for (int c = 0; c < ntgt; ++c)
        t[static_cast<size_t>(r)][static_cast<size_t>(c)] =
            total.counts[static_cast<size_t>(r)][static_cast<size_t>(c)] * inv;
    }

    // log-likelihood under the updated table
    auto ll_chunk = [&](int lo, int hi) {
      double ll = 0;
      for (int k = lo; k < hi; ++k) {
        const auto& src = pc.src[static_cast<size_t>(k)];
        const auto& tgt = pc.tgt[static_cast<size_t>(k)];
        double len_term = 1.0 / (static_cast<double>(src.size()) + 1.0);
        for (int j : tgt) {
          double p = t[0][static_cast<size_t>(j)];
          for (int i : src) p += t[static_cast<size_t>(i + 1)][static_cast<size_t>(j)];
          ll += std::log(std::max(p * len_term, 1e-300));
        }
      }
      return ll;
    };
    double ll = par::chunk_reduce(nverses, kChunk, 0.0, ll_chunk,
                                  [](double& a, const double& b) { a += b; });
    table.log_likelihood.push_back(ll);
  }

  // sparse final rows
  table.rows.resize(static_cast<size_t>(nsrc));
  for (int r = 0; r < nsrc; ++r) {
    auto& row = table.rows[static_cast<size_t>(r)];
    for (int c = 0; c < ntgt; ++c) {
      double p = t[static_cast<size_t>(r)][static_cast<size_t>(c)];
      if (p > 0) row.emplace_back(c, p);
    }
  }
  return table;
}

AlignmentSet align_pair(const TranslationTable& table, const MultiParallelCorpus& corpus) {
  const auto& es = corpus.at(table.src_lang);
  const auto& et = corpus.at(table.tgt_lang);
  AlignmentSet out;
  out.direction = table.src_lang + "->" + table.tgt_lang;
  LangPair pair(table.src_lang, table.tgt_lang);
  bool src_is_a = (pair.a == table.src_lang);
  for (const auto& [verse, tgt_tokens] : et.verses) {
    auto its = es.verses.find(verse);
    if (its == es.verses.end()) continue;
    const auto& src_tokens = its->second;
    auto& links = out.links[pair][verse];  // created even if empty
    if (src_tokens.empty() || tgt_tokens.empty()) continue;
    std::vector<int> src_idx;
    src_idx.reserve(src_tokens.size());
    for (const auto& w : src_tokens) src_idx.push_back(table.src_index(w));
    for (size_t j = 0; j < tgt_tokens.size(); ++j) {
      int tj = table.tgt_index(tgt_tokens[j]);
      // NULL (row 0) competes and wins ties, so no-evidence tokens stay unlinked
      double best = table.prob(0, tj);
      int best_i = -1;
      for (size_t i = 0; i < src_tokens.size(); ++i) {
        double p = src_idx[i] < 0 ? 0.0 : table.prob(src_idx[i] + 1, tj);
        if (p > best) {
          best = p;
          best_i = static_cast<int>(i);
        }
      }
      if (best_i >= 0) {
        if (src_is_a)
          links.emplace_back(best_i, static_cast<int>(j));
        else
          links.emplace_back(static_cast<int>(j), best_i);
      }
    }
  }
  out.normalize();
  return out;
}

AlignmentSet symmetrize_intersection(const AlignmentSet& forward, const AlignmentSet& backward) {
  AlignmentSet out;
  out.direction = "intersection";
  if (forward.links.size() != backward.links.size())
    fail_data("symmetrize: alignment sets cover different pairs");
  for (const auto& [pair, fw_verses] : forward.links) {
    auto itb = backward.links.find(pair);
    if (itb == backward.links.end())
      fail_data("symmetrize: pair " + pair.a + "-" + pair.b + " missing from backward set");
    const auto& bw_verses = itb->second;
    if (fw_verses.size() != bw_verses.size())
      fail_data("symmetrize: verse keys differ for pair " + pair.a + "-" + pair.b);
    for (const auto& [verse, fw] : fw_verses) {
      auto itv = bw_verses.find(verse);
      if (itv == bw_verses.end())
        fail_data("symmetrize: verse " + verse + " missing from backward set");
      const auto& bw = itv->second;
      auto& dst = out.links[pair][verse];
      std::set_intersection(fw.begin(), fw.end(), bw.begin(), bw.end(), std::back_inserter(dst));
    }
  }
  return out;
}

AlignmentSet align_language_pair(const MultiParallelCorpus& corpus, const std::string& a,
                                 const std::string& b, int iterations) {
  auto fwd_table = train_ibm1(corpus, a, b, iterations);
  auto bwd_table = train_ibm1(corpus, b, a, iterations);
  auto fwd = align_pair(fwd_table, corpus);
  auto bwd = align_pair(bwd_table, corpus);
  return symmetrize_intersection(fwd, bwd);
}

AlignmentSet read_pharaoh(const std::string& path, const LangPair& pair) {
  AlignmentSet out;
  out.direction = "import";
  auto lines = read_lines(path);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      fail_data(path + ":" + std::to_string(ln + 1) + ": malformed line (no tab)");
    VerseId verse = line.substr(0, tab);
    auto& vec = out.links[pair][verse];
    for (const auto& tok : split_ws(line.substr(tab + 1))) {
      size_t dash = tok.find('-');
      if (dash == std::string::npos)
        fail_data(path + ":" + std::to_string(ln + 1) + ": malformed link '" + tok + "'");
      try {
        size_t used_i = 0, used_j = 0;
        int i = std::stoi(tok.substr(0, dash), &used_i);
        int j = std::stoi(tok.substr(dash + 1), &used_j);
        if (used_i != dash || used_j != tok.size() - dash - 1 || i < 0 || j < 0)
          fail_data(path + ":" + std::to_string(ln + 1) + ": malformed link '" + tok + "'");
        vec.emplace_back(i, j);
      } catch (const std::invalid_argument&) {
        fail_data(path + ":" + std::to_string(ln + 1) + ": malformed link '" + tok + "'");
      } catch (const std::out_of_range&) {
        fail_data(path + ":" + std::to_string(ln + 1) + ": link index out of range '" + tok + "'");
      }
    }
  }
  out.normalize();
  return out;
}

void write_pharaoh(const AlignmentSet& set, const LangPair& pair, const std::string& path) {
  auto it = set.links.find(pair);
  if (it == set.links.end()) fail_data("write_pharaoh: pair not in alignment set");
  std::ostringstream out;
  for (const auto& [verse, vec] : it->second) {
    out << verse << '\t';
    for (size_t k = 0; k < vec.size(); ++k) {
      if (k) out << ' ';
      out << vec[k].first << '-' << vec[k].second;
    }
    out << '\n';
  }
  write_file(path, out.str());
}

void write_translation_table(const TranslationTable& table, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& src = r == 0 ? std::string(kNullToken) : table.src_vocab[r - 1];
    for (const auto& [c, p] : table.rows[r])
      out << src << '\t' << table.tgt_vocab[static_cast<size_t>(c)] << '\t' << p << '\n';
  }
  write_file(path, out.str());
}

}  // namespace glp
