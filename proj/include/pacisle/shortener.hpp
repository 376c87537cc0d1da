#pragma once

// Randomized word shortening. For W, with g, c0 random island elements:
//   W'  = W g            has even order n, t = W'^(n/2) in class K
//   y   = (t^c0 z)^k     central involution of the dihedral group <t^c0, z>
//   c   = c0 * post(y)   so that t^c centralizes z
//   d   = post(t^c)      so that t^(cd) = z
//   W'' = W'^(cd)        lies in the island
// and W = c d W'' d^-1 c^-1 g^-1, at most 4 + 4 + 1 + 4 + 4 = 17 letters.

#include <optional>
#include <sstream>
#include <string>

#include "action.hpp"
#include "island_kit.hpp"
#include "word.hpp"
#include "word_io.hpp"

namespace pacisle {

inline constexpr std::size_t kShortWordBound = 17;

struct ShorteningTrace {
  IslandElem g;
  unsigned n = 0;  // order of W'
  PowerAnnotation t;
  IslandElem c0;
  IslandElem y;
  Word c_tail;
  Word c;
  Word d;
  IslandElem w2;  // W''
  unsigned restarts = 0;
};

struct ShortWord {
  Word word;
  std::optional<ShorteningTrace> trace;
};

struct ShortenOptions {
  unsigned samples_per_step = 200;
  unsigned restarts = 50;
  bool force_pipeline = false;
};

class Shortener {
 public:
  explicit Shortener(const IslandKit& kit) : kit_(kit), act_(kit.action()), pkg_(kit.package()) {}

  ShortWord shorten(const Word& w, Rng& rng, const ShortenOptions& opt = {}) const {
    Word reduced = reduce(w);
    if (!opt.force_pipeline && length(reduced) <= kShortWordBound) return {std::move(reduced), std::nullopt};
    for (unsigned r = 0; r < opt.restarts; ++r) {
      // Fresh, independent streams for the g and c0 samplers on every restart.
      Rng g_stream(rng());
      Rng c_stream(rng());
      if (auto out = attempt(reduced, g_stream, c_stream, opt.samples_per_step)) {
        out->trace->restarts = r;
        return std::move(*out);
      }
    }
    throw Error(errc::kLasVegasFailure,
                "no success within " + std::to_string(opt.restarts) + " restarts of " +
                    std::to_string(opt.samples_per_step) + " samples per step");
  }

  ShortWord multiply_short(const ShortWord& u, const ShortWord& v, Rng& rng, const ShortenOptions& opt = {}) const {
    return shorten(concat(u.word, v.word), rng, opt);
  }

  ShortWord invert_short(const ShortWord& u) const { return {invert(u.word), std::nullopt}; }

 private:
  bool commute(const Mat& x, const Mat& y) const { return mat_mul(x, y) == mat_mul(y, x); }

  void check(bool ok, const char* what) const {
    if (!ok) throw Error(errc::kInvariantBreach, what);
  }

  std::optional<ShortWord> attempt(const Word& w, Rng& g_stream, Rng& c_stream, unsigned samples) const {
    const Mat& z = pkg_.z();
    ShorteningTrace tr;

    // 1. W' = W g with an involution power in class K.
    Word w_prime;
    Mat t_mat;
    bool found = false;
    for (unsigned s = 0; s < samples && !found; ++s) {
      tr.g = kit_.island_random(g_stream);
      w_prime = concat(w, Word::of(tr.g, pkg_.id()));
      tr.n = act_.order(w_prime);
      if (tr.n % 2) continue;
      tr.t = power(w_prime, tr.n / 2);
      t_mat = act_.to_matrix(tr.t);
      found = act_.class_of_signature(act_.signature_of_matrix(t_mat)) == pkg_.class_k;
    }
    if (!found) return std::nullopt;
    check(mat_mul(t_mat, t_mat).is_identity() && !t_mat.is_identity(), "t is not an involution");

    // 2. y from the dihedral group <t^c0, z>.
    Mat y_mat, t_c0;
    found = false;
    for (unsigned s = 0; s < samples && !found; ++s) {
      tr.c0 = kit_.island_random(c_stream);
      t_c0 = mat_mul(mat_mul(mat_inverse(tr.c0.matrix), t_mat), tr.c0.matrix);
      const Mat u = mat_mul(t_c0, z);
      if (u.is_identity()) {
        // t^c0 = z: the dihedral group degenerates to <z>.
        y_mat = z;
        found = true;
        continue;
      }
      auto y = act_.dihedral_even_power(Expr(u));
      if (!y) continue;
      y_mat = act_.to_matrix(*y);
      found = act_.class_of_signature(act_.signature_of_matrix(y_mat)) == pkg_.class_k;
    }
    if (!found) return std::nullopt;
    check(commute(y_mat, z) && commute(y_mat, t_c0), "y does not commute with z and t^c0");

    // 3-4. Canonical letter for y, then a post conjugating it to z.
    tr.y = island_letter(Expr(y_mat));
    tr.c_tail = kit_.changing_post(tr.y, &c_stream);

    // 5-6. t^c centralizes z; post it to z.
    tr.c = concat(Word::of(tr.c0, pkg_.id()), tr.c_tail);
    const IslandElem t_c = island_letter(conjugate(Expr(t_mat), tr.c));
    tr.d = kit_.changing_post(t_c, &c_stream);

    // 7. W'' = W'^(cd) lies in the island.
    const Word cd = concat(tr.c, tr.d);
    tr.w2 = island_letter(conjugate(Expr(w_prime), cd));
    check(commute(tr.w2.matrix, z), "W'' does not centralize z");

    Word result = concat({tr.c, tr.d, Word::of(tr.w2, pkg_.id()), invert(tr.d), invert(tr.c),
                          Word::of(island_inverse(tr.g), pkg_.id())});
    check(length(result) <= kShortWordBound, "assembled word exceeds 17 letters");
    check(act_.is_identity(Expr(result) * Expr(invert(w))), "assembled word differs from the input");
    return ShortWord{std::move(result), std::move(tr)};
  }

  IslandElem island_letter(const Expr& x) const {
    try {
      return kit_.to_island(x);
    } catch (const Error& e) {
      if (e.code() == errc::kNotInIsland) throw Error(errc::kInvariantBreach, "expected an island element: " + e.detail());
      throw;
    }
  }

  const IslandKit& kit_;
  const ActionEngine& act_;
  const GroupPackage& pkg_;
};

inline std::string format_trace(const ShorteningTrace& tr, const GroupPackage& pkg) {
  auto letter = [&](const IslandElem& x) { return format_word(Word::of(x), pkg); };
  std::ostringstream os;
  os << "trace.g: " << letter(tr.g) << '\n'
     << "trace.n: " << tr.n << '\n'
     << "trace.t: (" << format_word(tr.t.base, pkg) << ")^" << tr.t.exponent << '\n'
     << "trace.c0: " << letter(tr.c0) << '\n'
     << "trace.y: " << letter(tr.y) << '\n'
     << "trace.c_tail: " << format_word(tr.c_tail, pkg) << '\n'
     << "trace.c: " << format_word(tr.c, pkg) << '\n'
     << "trace.d: " << format_word(tr.d, pkg) << '\n'
     << "trace.w2: " << letter(tr.w2) << '\n'
     << "trace.restarts: " << tr.restarts << '\n';
  return os.str();
}

}  // namespace pacisle
