#pragma once

// Words over the island G and the shuttle T (T^3 = 1). A reduced word
// alternates island letters and shuttle letters, contains no island
// identity letter, and stores shuttle exponents as 1 (T) or 2 (T^-1).

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "error.hpp"
#include "island_elem.hpp"

namespace pacisle {

struct Shuttle {
  std::uint8_t exp = 1;  // 1 = T, 2 = T^-1
  bool operator==(const Shuttle&) const = default;
};

using Letter = std::variant<IslandElem, Shuttle>;

inline bool is_island(const Letter& l) { return std::holds_alternative<IslandElem>(l); }

class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Letter> letters, std::uint64_t package_id = 0)
      : letters_(std::move(letters)), package_(package_id), reduced_(letters_.empty()) {}

  static Word of(IslandElem x, std::uint64_t package_id = 0) {
    return Word(std::vector<Letter>{std::move(x)}, package_id);
  }
  static Word shuttle(std::uint8_t exp, std::uint64_t package_id = 0) {
    return Word(std::vector<Letter>{Shuttle{exp}}, package_id);
  }

  const std::vector<Letter>& letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  bool is_reduced() const noexcept { return reduced_; }
  std::uint64_t package_id() const noexcept { return package_; }

  /// Letter-for-letter equality (island letters compared by matrix).
  bool operator==(const Word& o) const { return letters_ == o.letters_; }

 private:
  friend Word reduce(const Word& w);
  std::vector<Letter> letters_;
  std::uint64_t package_ = 0;
  bool reduced_ = true;
};

/// Stack-based rewriting: adjacent island letters multiply, adjacent shuttle
/// exponents add mod 3; identity letters vanish, which may bring two letters
/// of the same kind together, so each push re-examines the new top.
inline Word reduce(const Word& w) {
  if (w.is_reduced()) return w;
  std::vector<Letter> out;
  out.reserve(w.size());
  for (const Letter& l : w.letters()) {
    if (const auto* s = std::get_if<Shuttle>(&l)) {
      std::uint8_t e = s->exp % 3;
      if (!out.empty() && !is_island(out.back())) {
        e = static_cast<std::uint8_t>((std::get<Shuttle>(out.back()).exp + e) % 3);
        out.pop_back();
      }
      if (e != 0) out.emplace_back(Shuttle{e});
    } else {
      IslandElem x = std::get<IslandElem>(l);
      if (!out.empty() && is_island(out.back())) {
        x = island_mul(std::get<IslandElem>(out.back()), x);
        out.pop_back();
      }
      if (!x.is_identity()) out.emplace_back(std::move(x));
    }
  }
  Word r(std::move(out), w.package_id());
  r.reduced_ = true;
  return r;
}

namespace detail {
inline std::uint64_t merge_package(std::uint64_t p, std::uint64_t q) {
  if (p != 0 && q != 0 && p != q)
    throw Error(errc::kPackageMismatch, "words belong to different packages");
  return p ? p : q;
}
}  // namespace detail

inline Word concat(const Word& w1, const Word& w2) {
  const std::uint64_t pkg = detail::merge_package(w1.package_id(), w2.package_id());
  std::vector<Letter> ls = w1.letters();
  ls.insert(ls.end(), w2.letters().begin(), w2.letters().end());
  return reduce(Word(std::move(ls), pkg));
}

inline Word concat(std::initializer_list<Word> ws) {
  Word out;
  for (const Word& w : ws) out = concat(out, w);
  return out;
}

inline Word invert(const Word& w) {
  std::vector<Letter> ls;
  ls.reserve(w.size());
  for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) {
    if (const auto* s = std::get_if<Shuttle>(&*it))
      ls.emplace_back(Shuttle{static_cast<std::uint8_t>((3 - s->exp % 3) % 3)});
    else
      ls.emplace_back(island_inverse(std::get<IslandElem>(*it)));
  }
  return reduce(Word(std::move(ls), w.package_id()));
}

/// Number of island letters plus number of shuttle letters, after reduction.
inline std::size_t length(const Word& w) { return w.is_reduced() ? w.size() : reduce(w).size(); }

inline Word commutator(const Word& w1, const Word& w2) {
  return concat({invert(w1), invert(w2), w1, w2});
}

/// base^exponent without expanding letters.
struct PowerAnnotation {
  Word base;
  unsigned exponent = 1;
};

inline PowerAnnotation power(const Word& w, unsigned k) {
  if (k == 0) throw Error(errc::kUsage, "power exponent must be positive");
  return PowerAnnotation{reduce(w), k};
}

}  // namespace pacisle
