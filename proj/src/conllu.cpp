#include "glp/conllu.hpp"

#include "glp/util.hpp"

namespace glp {

std::vector<int> ConlluSentence::depths() const {
  int n = static_cast<int>(tokens.size());
  std::vector<int> depth(n, -1);
  for (int i = 0; i < n; ++i) {
    // follow head links; guaranteed acyclic after validation
    int steps = 0;
    int cur = i;
    while (tokens[cur].head != 0) {
      cur = tokens[cur].head - 1;
      ++steps;
    }
    depth[i] = steps;
  }
  return depth;
}

static void validate_sentence(const ConlluSentence& s, const std::string& where) {
  int n = static_cast<int>(s.tokens.size());
  int roots = 0;
  for (const auto& t : s.tokens) {
    if (t.head < 0 || t.head > n)
      fail_data(where + ": head " + std::to_string(t.head) + " out of range");
    if (t.head == 0) ++roots;
  }
  if (roots == 0) fail_data(where + ": no root token");
  if (roots > 1) fail_data(where + ": multiple root tokens");
  // every token must reach the root; a cycle never does
  for (int i = 0; i < n; ++i) {
    int cur = i, steps = 0;
    while (s.tokens[cur].head != 0) {
      cur = s.tokens[cur].head - 1;
      if (++steps > n) fail_data(where + ": cyclic head chain at token " + std::to_string(i + 1));
    }
  }
}

std::vector<ConlluSentence> read_conllu(const std::string& path) {
  std::vector<ConlluSentence> sentences;
  ConlluSentence cur;
  bool has_content = false;
  auto lines = read_lines(path);
  int sent_index = 0;
  auto flush = [&](size_t ln) {
    if (!has_content) return;
    validate_sentence(cur, path + ": sentence " + std::to_string(sent_index + 1) +
                               " (ending line " + std::to_string(ln) + ")");
    sentences.push_back(std::move(cur));
    cur = ConlluSentence{};
    has_content = false;
    ++sent_index;
  };
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    const std::string where = path + ":" + std::to_string(ln + 1);
    if (line.empty()) {
      flush(ln + 1);
      continue;
    }
    if (line[0] == '#') {
      cur.comments.push_back(line);
      has_content = true;
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() < 4) fail_data(where + ": expected >= 4 tab-separated columns");
    const std::string& id = cols[0];
    has_content = true;
    size_t dash = id.find('-');
    if (dash != std::string::npos) {
      MwtRange r;
      r.start = std::stoi(id.substr(0, dash));
      r.end = std::stoi(id.substr(dash + 1));
      r.form = cols[1];
      cur.ranges.push_back(std::move(r));
      continue;  // UPOS "_" expected on range lines, no tag required
    }
    if (id.find('.') != std::string::npos) continue;  // empty node (enhanced deps), skipped
    ConlluToken t;
    t.id = std::stoi(id);
    t.form = cols[1];
    const std::string& upos = cols[3];
    if (upos == "_") fail_data(where + ": missing UPOS on token line");
    auto parsed = parse_upos(upos);
    if (!parsed || *parsed == Upos::Null) fail_data(where + ": unknown UPOS '" + upos + "'");
    t.upos = *parsed;
    if (cols.size() < 7 || cols[6] == "_")
      fail_data(where + ": missing HEAD column");
    t.head = std::stoi(cols[6]);
    if (t.id != static_cast<int>(cur.tokens.size()) + 1)
      fail_data(where + ": token id " + std::to_string(t.id) + " out of sequence");
    cur.tokens.push_back(std::move(t));
  }
  flush(lines.size());
  return sentences;
}

}  // namespace glp
