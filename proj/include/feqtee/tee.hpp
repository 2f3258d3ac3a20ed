#pragma once

#include <charconv>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "feqtee/error.hpp"

namespace feqtee {

/******************************************************************************
TEE text. Tokens are separated by ASCII whitespace:

  E<n>          apply extrusion record n
  P<n> Re       remember the current state under tag n
  gp P<n>       load the state remembered under tag n
  sv <i> <i>..  select the region enclosed by generic-disk vertices i...

A program starts with an E. gp may only name tags introduced earlier.
******************************************************************************/

struct TeeInstruction {
  enum class Kind { Apply, Remember, GetPrevious, Select };
  Kind kind = Kind::Apply;
  int value = 0;         // record id or tag
  std::vector<int> ids;  // Select only

  static TeeInstruction apply(int id) { return {Kind::Apply, id, {}}; }
  static TeeInstruction remember(int tag) { return {Kind::Remember, tag, {}}; }
  static TeeInstruction get_previous(int tag) { return {Kind::GetPrevious, tag, {}}; }
  static TeeInstruction select(std::vector<int> ids) { return {Kind::Select, 0, std::move(ids)}; }

  bool operator==(const TeeInstruction&) const = default;
};

struct TeeProgram {
  std::vector<TeeInstruction> instructions;

  std::size_t size() const { return instructions.size(); }
  bool empty() const { return instructions.empty(); }
  bool operator==(const TeeProgram&) const = default;
};

enum class ParseMode { Strict, Lenient };

namespace detail {

struct Token {
  std::string_view text;
  std::size_t offset;
};

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t j = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > j) out.push_back({s.substr(j, i - j), j});
  }
  return out;
}

inline bool parse_uint(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool prefixed(std::string_view s, char prefix, int& out) {
  return s.size() >= 2 && s[0] == prefix && parse_uint(s.substr(1), out);
}

}  // namespace detail

/// Parse TEE text. In lenient mode the program is cut before the first
/// offending token instead of failing.
inline TeeProgram parse_tee(std::string_view text, ParseMode mode = ParseMode::Strict) {
  const auto toks = detail::tokenize(text);
  TeeProgram prog;
  std::set<int> tags;
  std::size_t i = 0;
  auto fail = [&](ErrorKind kind, const std::string& msg, std::size_t offset) -> bool {
    if (mode == ParseMode::Lenient) return true;
    throw Error(kind, msg + " at offset " + std::to_string(offset), offset);
  };
  while (i < toks.size()) {
    const auto& t = toks[i];
    int n = 0;
    TeeInstruction ins;
    std::size_t consumed = 1;
    if (detail::prefixed(t.text, 'E', n)) {
      ins = TeeInstruction::apply(n);
    } else if (detail::prefixed(t.text, 'P', n)) {
      if (i + 1 >= toks.size() || toks[i + 1].text != "Re") {
        if (fail(ErrorKind::Syntax, "tag P" + std::to_string(n) + " must be followed by Re", t.offset)) break;
      }
      ins = TeeInstruction::remember(n);
      consumed = 2;
    } else if (t.text == "gp") {
      if (i + 1 >= toks.size() || !detail::prefixed(toks[i + 1].text, 'P', n)) {
        if (fail(ErrorKind::Syntax, "gp must be followed by a tag P<n>", t.offset)) break;
      }
      if (!tags.count(n)) {
        if (fail(ErrorKind::Semantic, "gp refers to unknown tag P" + std::to_string(n), toks[i + 1].offset)) break;
      }
      ins = TeeInstruction::get_previous(n);
      consumed = 2;
    } else if (t.text == "sv") {
      std::vector<int> ids;
      std::size_t j = i + 1;
      int v = 0;
      while (j < toks.size() && detail::parse_uint(toks[j].text, v)) {
        ids.push_back(v);
        ++j;
      }
      if (j < toks.size() && !toks[j].text.empty() && toks[j].text[0] >= '0' && toks[j].text[0] <= '9' &&
          !detail::parse_uint(toks[j].text, v)) {
        if (fail(ErrorKind::Syntax, "bad vertex id '" + std::string(toks[j].text) + "'", toks[j].offset)) break;
      }
      if (ids.empty()) {
        if (fail(ErrorKind::Syntax, "sv needs at least one vertex id", t.offset)) break;
      }
      ins = TeeInstruction::select(std::move(ids));
      consumed = j - i;
    } else {
      if (fail(ErrorKind::Syntax, "unknown token '" + std::string(t.text) + "'", t.offset)) break;
    }
    if (prog.empty() && ins.kind != TeeInstruction::Kind::Apply) {
      if (fail(ErrorKind::Semantic, "program must start with an extrusion", t.offset)) break;
    }
    if (ins.kind == TeeInstruction::Kind::Remember) tags.insert(ins.value);
    prog.instructions.push_back(std::move(ins));
    i += consumed;
  }
  return prog;
}

inline std::string serialize_tee(const TeeProgram& prog) {
  std::string out;
  auto word = [&](const std::string& w) {
    if (!out.empty()) out += ' ';
    out += w;
  };
  for (const auto& ins : prog.instructions) {
    switch (ins.kind) {
      case TeeInstruction::Kind::Apply: word("E" + std::to_string(ins.value)); break;
      case TeeInstruction::Kind::Remember: word("P" + std::to_string(ins.value)); word("Re"); break;
      case TeeInstruction::Kind::GetPrevious: word("gp"); word("P" + std::to_string(ins.value)); break;
      case TeeInstruction::Kind::Select:
        word("sv");
        for (int id : ins.ids) word(std::to_string(id));
        break;
    }
  }
  return out;
}

inline std::size_t count_extrusions(const TeeProgram& prog) {
  std::size_t n = 0;
  for (const auto& ins : prog.instructions) n += ins.kind == TeeInstruction::Kind::Apply;
  return n;
}

}  // namespace feqtee
