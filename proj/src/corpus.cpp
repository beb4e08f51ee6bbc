#include "glp/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "glp/util.hpp"

namespace glp {

const std::string& role_name(Role r) {
  static const std::string names[3] = {"source", "dev", "target"};
  return names[static_cast<int>(r)];
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "source") return Role::Source;
  if (s == "dev") return Role::Dev;
  if (s == "target") return Role::Target;
  return std::nullopt;
}

const LanguageEdition* MultiParallelCorpus::find(const std::string& lang) const {
  for (const auto& e : editions)
    if (e.lang == lang) return &e;
  return nullptr;
}

const LanguageEdition& MultiParallelCorpus::at(const std::string& lang) const {
  const auto* e = find(lang);
  if (!e) fail_data("language not in corpus: " + lang);
  return *e;
}

std::vector<std::string> MultiParallelCorpus::languages() const {
  std::vector<std::string> out;
  out.reserve(editions.size());
  for (const auto& e : editions) out.push_back(e.lang);
  return out;
}

int MultiParallelCorpus::language_index(const std::string& lang) const {
  for (size_t i = 0; i < editions.size(); ++i)
    if (editions[i].lang == lang) return static_cast<int>(i);
  return -1;
}

std::vector<VerseId> MultiParallelCorpus::all_verses() const {
  std::set<VerseId> ids;
  for (const auto& e : editions)
    for (const auto& [v, _] : e.verses) ids.insert(v);
  return {ids.begin(), ids.end()};
}

std::vector<VerseId> MultiParallelCorpus::shared_verses(const std::string& a,
                                                        const std::string& b) const {
  const auto& ea = at(a);
  const auto& eb = at(b);
  std::vector<VerseId> out;
  for (const auto& [v, toks] : ea.verses) {
    if (toks.empty()) continue;
    auto it = eb.verses.find(v);
    if (it != eb.verses.end() && !it->second.empty()) out.push_back(v);
  }
  return out;
}

LanguageEdition load_edition(const std::string& lang, Role role, const std::string& text_path,
                             EditionLoadReport* report) {
  LanguageEdition e;
  e.lang = lang;
  e.role = role;
  EditionLoadReport rep;
  rep.lang = lang;
  auto lines = read_lines(text_path);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    rep.input_lines++;
    if (line.empty()) {
      rep.rejected_lines++;
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      fail_data(text_path + ":" + std::to_string(ln + 1) + ": malformed line (no tab)");
    VerseId verse = line.substr(0, tab);
    if (verse.empty())
      fail_data(text_path + ":" + std::to_string(ln + 1) + ": empty verse id");
    if (e.verses.count(verse))
      fail_data(text_path + ":" + std::to_string(ln + 1) + ": duplicate verse id " + verse);
    auto tokens = split_ws(line.substr(tab + 1));
    if (tokens.empty()) rep.empty_verses.push_back(verse);
    e.verses.emplace(std::move(verse), std::move(tokens));
    rep.stored_verses++;
  }
  if (report) *report = std::move(rep);
  return e;
}

void load_tag_file(const std::string& path, LanguageEdition& edition) {
  auto lines = read_lines(path);
  std::map<VerseId, std::vector<Upos>> tags;
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      fail_data(path + ":" + std::to_string(ln + 1) + ": malformed line (no tab)");
    VerseId verse = line.substr(0, tab);
    auto it = edition.verses.find(verse);
    if (it == edition.verses.end())
      fail_data(path + ":" + std::to_string(ln + 1) + ": verse " + verse +
                " not present in text of " + edition.lang);
    auto fields = split_ws(line.substr(tab + 1));
    std::vector<Upos> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      auto t = parse_upos(f);
      if (!t) fail_data(path + ":" + std::to_string(ln + 1) + ": unknown tag '" + f + "'");
      row.push_back(*t);
    }
    if (row.size() != it->second.size())
      fail_data(path + ":" + std::to_string(ln + 1) + ": tag count " +
                std::to_string(row.size()) + " != token count " +
                std::to_string(it->second.size()) + " for verse " + verse);
    tags.emplace(std::move(verse), std::move(row));
  }
  edition.tags = std::move(tags);
}

MultiParallelCorpus load_corpus(const std::vector<CorpusFileSpec>& files,
                                CorpusLoadReport* report) {
  MultiParallelCorpus corpus;
  CorpusLoadReport rep;
  for (const auto& spec : files) {
    EditionLoadReport erep;
    auto edition = load_edition(spec.lang, spec.role, spec.text_path, &erep);
    if (spec.role == Role::Source && spec.tag_path.empty())
      fail_data("source language " + spec.lang + " has no tag file");
    if (!spec.tag_path.empty()) {
      load_tag_file(spec.tag_path, edition);
      if (spec.role == Role::Source) {
        for (const auto& [v, toks] : edition.verses) {
          if (!edition.tags.count(v))
            fail_data("source language " + spec.lang + ": verse " + v + " has no tags");
          (void)toks;
        }
      }
    }
    rep.editions.push_back(std::move(erep));
    corpus.editions.push_back(std::move(edition));
  }
  if (report) *report = std::move(rep);
  return corpus;
}

void write_corpus_text(const LanguageEdition& edition, const std::string& path) {
  std::ostringstream out;
  for (const auto& [v, toks] : edition.verses) out << v << '\t' << join(toks, " ") << '\n';
  write_file(path, out.str());
}

void write_tag_file(const LanguageEdition& edition, const std::string& path) {
  std::ostringstream out;
  for (const auto& [v, tags] : edition.tags) {
    std::vector<std::string> names;
    names.reserve(tags.size());
    for (Upos t : tags) names.push_back(to_string(t));
    out << v << '\t' << join(names, " ") << '\n';
  }
  write_file(path, out.str());
}

void write_tagged_dataset(const ProjectedDataset& dataset, const std::string& path) {
  std::ostringstream out;
  out << "# lang " << dataset.lang << '\n';
  out << "# provenance " << dataset.provenance << '\n';
  out << "# threshold " << dataset.threshold << '\n';
  for (const auto& s : dataset.sentences) {
    out << "# verse " << s.verse << '\n';
    for (size_t i = 0; i < s.tokens.size(); ++i)
      out << s.tokens[i] << '\t' << to_string(s.tags[i]) << '\n';
    out << '\n';
  }
  write_file(path, out.str());
}

ProjectedDataset read_tagged_dataset(const std::string& path) {
  ProjectedDataset ds;
  auto lines = read_lines(path);
  TaggedSentence cur;
  bool in_sentence = false;
  auto flush = [&]() {
    if (in_sentence) {
      ds.sentences.push_back(std::move(cur));
      cur = TaggedSentence{};
      in_sentence = false;
    }
  };
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      auto fields = split_ws(line.substr(1));
      if (fields.size() >= 2 && fields[0] == "lang") ds.lang = fields[1];
      else if (fields.size() >= 2 && fields[0] == "provenance") ds.provenance = fields[1];
      else if (fields.size() >= 2 && fields[0] == "threshold") ds.threshold = std::stod(fields[1]);
      else if (fields.size() >= 2 && fields[0] == "verse") {
        flush();
        cur.verse = fields[1];
        in_sentence = true;
      }
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      fail_data(path + ":" + std::to_string(ln + 1) + ": malformed line (no tab)");
    auto tag = parse_upos(line.substr(tab + 1));
    if (!tag)
      fail_data(path + ":" + std::to_string(ln + 1) + ": unknown tag '" + line.substr(tab + 1) +
                "'");
    if (!in_sentence) in_sentence = true;  // dataset without verse comments
    cur.tokens.push_back(line.substr(0, tab));
    cur.tags.push_back(*tag);
  }
  flush();
  return ds;
}

}  // namespace glp
