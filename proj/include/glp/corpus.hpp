#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glp/upos.hpp"

namespace glp {

// Verse-keyed multiparallel corpus.  One text file per language edition,
// lines "VerseId\ttoken token ...".  Tag files use the same key format
// with UPOS tags in place of tokens.

using VerseId = std::string;

enum class Role { Source, Dev, Target };

const std::string& role_name(Role r);
std::optional<Role> parse_role(std::string_view s);

struct LanguageEdition {
  std::string lang;  // ISO-639-3 style code
  Role role = Role::Target;
  std::map<VerseId, std::vector<std::string>> verses;
  std::map<VerseId, std::vector<Upos>> tags;  // present for source (always) and dev

  bool has_tags(const VerseId& v) const { return tags.count(v) > 0; }
};

struct EditionLoadReport {
  std::string lang;
  int input_lines = 0;
  int stored_verses = 0;
  int rejected_lines = 0;  // blank lines only; anything malformed is a hard error
  std::vector<VerseId> empty_verses;
};

struct CorpusLoadReport {
  std::vector<EditionLoadReport> editions;
};

struct MultiParallelCorpus {
  std::vector<LanguageEdition> editions;  // input order, defines the language order

  const LanguageEdition* find(const std::string& lang) const;
  const LanguageEdition& at(const std::string& lang) const;
  std::vector<std::string> languages() const;
  int language_index(const std::string& lang) const;  // -1 if absent
  // Sorted union of verse ids over all editions.
  std::vector<VerseId> all_verses() const;
  // Sorted ids of verses present (with >= 1 token) in both languages.
  std::vector<VerseId> shared_verses(const std::string& a, const std::string& b) const;
};

struct CorpusFileSpec {
  std::string lang;
  Role role = Role::Target;
  std::string text_path;
  std::string tag_path;  // empty = none; required for role == Source
};

LanguageEdition load_edition(const std::string& lang, Role role, const std::string& text_path,
                             EditionLoadReport* report = nullptr);

// Attaches tags from a tag file; keys and token counts must match the text.
void load_tag_file(const std::string& path, LanguageEdition& edition);

MultiParallelCorpus load_corpus(const std::vector<CorpusFileSpec>& files,
                                CorpusLoadReport* report = nullptr);

void write_corpus_text(const LanguageEdition& edition, const std::string& path);
void write_tag_file(const LanguageEdition& edition, const std::string& path);

// ---- projected tagged datasets ----

struct TaggedSentence {
  VerseId verse;
  std::vector<std::string> tokens;
  std::vector<Upos> tags;              // NULL allowed
  std::vector<double> confidence;      // optional, not serialized

  bool operator==(const TaggedSentence& o) const {
    return verse == o.verse && tokens == o.tokens && tags == o.tags;
  }
};

struct ProjectedDataset {
  std::string lang;
  std::string provenance;  // "baseline" | "glp-b" | "glp-sl" | "tagger" | ...
  double threshold = 0.0;  // confidence threshold used upstream, 0 if n/a
  std::vector<TaggedSentence> sentences;

  bool operator==(const ProjectedDataset& o) const {
    return lang == o.lang && provenance == o.provenance && threshold == o.threshold &&
           sentences == o.sentences;
  }
};

// Lines "token\tTAG" (NULL spelled out), blank line between sentences,
// "# verse <id>" before each sentence, header comments carry provenance.
void write_tagged_dataset(const ProjectedDataset& dataset, const std::string& path);
ProjectedDataset read_tagged_dataset(const std::string& path);

}  // namespace glp
