#pragma once

#include <string>
#include <vector>

#include "glp/upos.hpp"

namespace glp {

// CoNLL-U v2 reader, restricted to what evaluation needs: forms, UPOS,
// heads, multiword-token ranges, comments.

struct ConlluToken {
  int id = 0;         // 1-based position
  std::string form;
  Upos upos = Upos::X;
  int head = 0;       // 0 = root, otherwise 1-based token id
};

struct MwtRange {
  int start = 0;  // 1-based, inclusive
  int end = 0;
  std::string form;
};

struct ConlluSentence {
  std::vector<ConlluToken> tokens;
  std::vector<MwtRange> ranges;
  std::vector<std::string> comments;

  // Distance to root following head links; root token has depth 0.
  std::vector<int> depths() const;
};

std::vector<ConlluSentence> read_conllu(const std::string& path);

}  // namespace glp
