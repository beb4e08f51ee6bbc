#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace glp {

// The 17 Universal POS tags in lexicographic order, plus a NULL sentinel
// for "no projected label".  Indices are part of the file formats and the
// checkpoint layout: 0..16 real tags, 17 = NULL.
enum class Upos : uint8_t {
  ADJ = 0,
  ADP,
  ADV,
  AUX,
  CCONJ,
  DET,
  INTJ,
  NOUN,
  NUM,
  PART,
  PRON,
  PROPN,
  PUNCT,
  SCONJ,
  SYM,
  VERB,
  X,
  Null = 17,
};

inline constexpr int kNumTags = 17;
inline constexpr int kNullTagIndex = 17;

const std::array<std::string, 18>& upos_names();
const std::string& to_string(Upos tag);
std::optional<Upos> parse_upos(std::string_view s);  // accepts "NULL"
inline int tag_index(Upos t) { return static_cast<int>(t); }
inline Upos tag_from_index(int i) { return static_cast<Upos>(i); }

}  // namespace glp
