#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linalg.hpp"

namespace pacisle {

/// Letters of the island generator alphabet {a, a^-1, b, b^-1}; the
/// enumerator order is the tie-break order for minimal words.
enum class Gen : std::uint8_t { a = 0, a_inv = 1, b = 2, b_inv = 3 };

using GenWord = std::vector<Gen>;

inline char gen_char(Gen g) {
  switch (g) {
    case Gen::a: return 'a';
    case Gen::a_inv: return 'A';
    case Gen::b: return 'b';
    case Gen::b_inv: return 'B';
  }
  return '?';
}

inline std::optional<Gen> gen_from_char(char c) {
  switch (c) {
    case 'a': return Gen::a;
    case 'A': return Gen::a_inv;
    case 'b': return Gen::b;
    case 'B': return Gen::b_inv;
    default: return std::nullopt;
  }
}

inline Gen gen_inverse(Gen g) { return static_cast<Gen>(static_cast<std::uint8_t>(g) ^ 1u); }

inline GenWord invert(const GenWord& w) {
  GenWord out(w.rbegin(), w.rend());
  for (auto& g : out) g = gen_inverse(g);
  return out;
}

/// Compact form used inside word tokens: "abB".
inline std::string gen_word_chars(const GenWord& w) {
  std::string s;
  for (Gen g : w) s.push_back(gen_char(g));
  return s;
}

/// Token form used in membership files: "a b B".
inline std::string gen_word_tokens(const GenWord& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s.push_back(' ');
    s.push_back(gen_char(w[i]));
  }
  return s;
}

inline std::optional<GenWord> parse_gen_chars(std::string_view s) {
  GenWord w;
  for (char c : s) {
    auto g = gen_from_char(c);
    if (!g) return std::nullopt;
    w.push_back(*g);
  }
  return w;
}

/// Shortlex order: shorter first, then lexicographic in generator order.
inline bool shortlex_less(const GenWord& x, const GenWord& y) {
  if (x.size() != y.size()) return x.size() < y.size();
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

/// An element of the island G = C(z): its exact matrix and, when known,
/// a word in the island generators that evaluates to it.
struct IslandElem {
  Mat matrix;
  std::optional<GenWord> gen_word;

  bool is_identity() const { return matrix.is_identity(); }
  bool operator==(const IslandElem& o) const { return matrix == o.matrix; }
};

inline IslandElem island_mul(const IslandElem& x, const IslandElem& y) {
  IslandElem r{mat_mul(x.matrix, y.matrix), std::nullopt};
  if (x.gen_word && y.gen_word) {
    GenWord w = *x.gen_word;
    w.insert(w.end(), y.gen_word->begin(), y.gen_word->end());
    r.gen_word = std::move(w);
  }
  return r;
}

inline IslandElem island_inverse(const IslandElem& x) {
  IslandElem r{mat_inverse(x.matrix), std::nullopt};
  if (x.gen_word) r.gen_word = invert(*x.gen_word);
  return r;
}

/// Evaluates a generator word given the matrices of a and b.
inline Mat evaluate_gen_word(const GenWord& w, const Mat& a, const Mat& b) {
  const Mat a_inv = mat_inverse(a);
  const Mat b_inv = mat_inverse(b);
  Mat m = Mat::identity(a.field(), a.dim());
  for (Gen g : w) {
    switch (g) {
      case Gen::a: m = mat_mul(m, a); break;
      case Gen::a_inv: m = mat_mul(m, a_inv); break;
      case Gen::b: m = mat_mul(m, b); break;
      case Gen::b_inv: m = mat_mul(m, b_inv); break;
    }
  }
  return m;
}

}  // namespace pacisle
