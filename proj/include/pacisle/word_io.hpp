#pragma once

// Word text format: whitespace-separated tokens
//   T        shuttle letter T
//   T-       shuttle letter T^-1
//   g:<name> island element: a package matrix name, or a generator word such as "abB"
//   g=<name> island element defined inline by a `matrix <name> <d>` block
// An empty word denotes the identity.

#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "package.hpp"
#include "word.hpp"

namespace pacisle {

using InlineMatrices = std::map<std::string, Mat>;

namespace detail {

inline IslandElem resolve_island(const std::string& name, const GroupPackage& pkg) {
  if (name != "T") {
    if (auto it = pkg.matrices.find(name); it != pkg.matrices.end()) return IslandElem{it->second, std::nullopt};
  }
  if (auto gw = parse_gen_chars(name); gw && !name.empty())
    return IslandElem{evaluate_gen_word(*gw, pkg.gen_a(), pkg.gen_b()), *gw};
  throw Error(errc::kParseError, "unknown island element 'g:" + name + "'");
}

inline void check_in_island(const IslandElem& x, const GroupPackage& pkg, const std::string& token) {
  if (pkg.membership.entries.empty()) return;
  if (!pkg.membership.find(fingerprint_of(x.matrix, pkg.anchors)))
    throw Error(errc::kNotInIsland, "letter '" + token + "' is not an island element");
}

}  // namespace detail

inline Word parse_word(const std::string& text, const GroupPackage& pkg, const InlineMatrices& inline_mats = {}) {
  std::istringstream in(text);
  std::vector<Letter> letters;
  std::string tok;
  while (in >> tok) {
    if (tok == "T") {
      letters.emplace_back(Shuttle{1});
    } else if (tok == "T-") {
      letters.emplace_back(Shuttle{2});
    } else if (tok.rfind("g:", 0) == 0) {
      IslandElem x = detail::resolve_island(tok.substr(2), pkg);
      detail::check_in_island(x, pkg, tok);
      letters.emplace_back(std::move(x));
    } else if (tok.rfind("g=", 0) == 0) {
      auto it = inline_mats.find(tok.substr(2));
      if (it == inline_mats.end()) throw Error(errc::kParseError, "no inline matrix for '" + tok + "'");
      if (it->second.dim() != pkg.dim || !(it->second.field() == pkg.field))
        throw Error(errc::kDimensionMismatch, "inline matrix '" + it->first + "' does not match the package");
      IslandElem x{it->second, std::nullopt};
      detail::check_in_island(x, pkg, tok);
      letters.emplace_back(std::move(x));
    } else {
      throw Error(errc::kParseError, "bad word token '" + tok + "'");
    }
  }
  return reduce(Word(std::move(letters), pkg.id()));
}

/// A word document: optional inline `matrix` blocks, then the word itself
/// (remaining non-comment lines are joined).
inline Word parse_word_document(const std::string& text, const GroupPackage& pkg) {
  std::istringstream in(text);
  InlineMatrices inline_mats;
  std::string line, word_text;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("matrix ", 0) == 0) {
      std::istringstream h(line);
      std::string kw, name;
      std::size_t d = 0;
      h >> kw >> name >> d;
      if (d != pkg.dim) throw Error(errc::kDimensionMismatch, "inline matrix dimension " + std::to_string(d));
      inline_mats[name] = read_matrix_rows(in, d, pkg.field);
      continue;
    }
    if (!line.empty() && line[0] == '#') continue;
    word_text += line + " ";
  }
  return parse_word(word_text, pkg, inline_mats);
}

/// Minimal generator word of an island matrix, via the membership table.
inline const GenWord& canonical_gen_word(const Mat& m, const GroupPackage& pkg) {
  const GenWord* gw = pkg.membership.find(fingerprint_of(m, pkg.anchors));
  if (!gw) throw Error(errc::kNotInIsland, "island letter is not in the membership table");
  return *gw;
}

inline std::string format_letter(const Letter& l, const GroupPackage& pkg) {
  if (const auto* s = std::get_if<Shuttle>(&l)) return s->exp == 1 ? "T" : "T-";
  const auto& x = std::get<IslandElem>(l);
  if (pkg.membership.entries.empty()) {
    if (!x.gen_word) throw Error(errc::kNotInIsland, "island letter without generator word");
    return "g:" + gen_word_chars(*x.gen_word);
  }
  return "g:" + gen_word_chars(canonical_gen_word(x.matrix, pkg));
}

inline std::string format_word(const Word& w, const GroupPackage& pkg) {
  std::string out;
  const Word r = reduce(w);
  for (const Letter& l : r.letters()) {
    if (!out.empty()) out.push_back(' ');
    out += format_letter(l, pkg);
  }
  return out;
}

}  // namespace pacisle
