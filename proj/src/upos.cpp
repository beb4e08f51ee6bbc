#include "glp/upos.hpp"

namespace glp {

const std::array<std::string, 18>& upos_names() {
  static const std::array<std::string, 18> names = {
      "ADJ",  "ADP",   "ADV",   "AUX",  "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
      "PART", "PRON",  "PROPN", "PUNCT", "SCONJ", "SYM",  "VERB", "X",    "NULL"};
  return names;
}

const std::string& to_string(Upos tag) { return upos_names()[static_cast<size_t>(tag)]; }

std::optional<Upos> parse_upos(std::string_view s) {
  const auto& names = upos_names();
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == s) return static_cast<Upos>(i);
  }
  return std::nullopt;
}

}  // namespace glp
