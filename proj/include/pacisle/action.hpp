#pragma once

// Words realized as actions on the package's module: identity test through
// the anchor pair, the order oracle, involution extraction, class
// signatures, and explicit matrix realization.

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "package.hpp"
#include "word.hpp"
#include "word_io.hpp"

namespace pacisle {

/// A product of factors, each either a (possibly powered) word or an
/// explicit matrix that has already been realized. Lets the pipeline form
/// t^c0 * z and similar products without expanding letters.
class Expr {
 public:
  using Term = std::variant<PowerAnnotation, Mat>;

  Expr() = default;
  Expr(Word w) { terms_.emplace_back(PowerAnnotation{std::move(w), 1}); }  // NOLINT(implicit)
  Expr(PowerAnnotation p) { terms_.emplace_back(std::move(p)); }           // NOLINT(implicit)
  Expr(Mat m) { terms_.emplace_back(std::move(m)); }                       // NOLINT(implicit)
  Expr(const IslandElem& x) { terms_.emplace_back(x.matrix); }             // NOLINT(implicit)

  const std::vector<Term>& terms() const noexcept { return terms_; }

  Expr& operator*=(const Expr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
  }
  friend Expr operator*(Expr x, const Expr& y) { return x *= y; }

  Expr pow(unsigned k) const {
    Expr r;
    for (unsigned i = 0; i < k; ++i) r *= *this;
    return r;
  }

 private:
  std::vector<Term> terms_;
};

/// x^c = c^-1 x c
inline Expr conjugate(const Expr& x, const Word& c) { return Expr(invert(c)) * x * Expr(c); }

class ActionEngine {
 public:
  explicit ActionEngine(const GroupPackage& pkg) : pkg_(pkg) {
    shuttle_[0] = pkg.shuttle();
    shuttle_[1] = mat_mul(pkg.shuttle(), pkg.shuttle());
    for (const auto& text : pkg.classes.probe_words) probes_.push_back(to_matrix(parse_word(text, pkg)));
  }

  const GroupPackage& package() const noexcept { return pkg_; }

  Vec apply_word(const Expr& e, Vec v) const {
    if (v.size() != pkg_.dim) throw Error(errc::kDimensionMismatch, "vector length does not match package");
    for (const auto& t : e.terms()) {
      if (const auto* m = std::get_if<Mat>(&t)) {
        v = vec_apply(v, *m);
      } else {
        const auto& p = std::get<PowerAnnotation>(t);
        for (unsigned k = 0; k < p.exponent; ++k)
          for (const Letter& l : p.base.letters()) v = vec_apply(v, letter_matrix(l));
      }
    }
    return v;
  }

  Fingerprint fingerprint(const Expr& e) const {
    return fingerprint_from_images(apply_word(e, pkg_.anchors.v1), apply_word(e, pkg_.anchors.v2));
  }

  /// Exact, given that the anchors have trivial joint stabilizer.
  bool is_identity(const Expr& e) const {
    return apply_word(e, pkg_.anchors.v1) == pkg_.anchors.v1 && apply_word(e, pkg_.anchors.v2) == pkg_.anchors.v2;
  }

  /// One uniformly random vector. A `false` is certain; a `true` may be wrong.
  bool is_identity_mc(const Expr& e, Rng& rng) const {
    const Vec v = random_vec(pkg_.dim, pkg_.field, rng);
    return apply_word(e, v) == v;
  }

  /// Smallest k >= 1 with e^k = 1, found by stepping the anchor pair at most
  /// max_order times.
  unsigned order(const Expr& e) const {
    Vec u1 = pkg_.anchors.v1, u2 = pkg_.anchors.v2;
    for (unsigned k = 1; k <= pkg_.max_order; ++k) {
      u1 = apply_word(e, std::move(u1));
      u2 = apply_word(e, std::move(u2));
      if (u1 == pkg_.anchors.v1 && u2 == pkg_.anchors.v2) return k;
    }
    throw Error(errc::kOrderOverflow, "no power up to " + std::to_string(pkg_.max_order) + " is the identity");
  }

  std::optional<PowerAnnotation> power_to_involution(const Word& w) const {
    const unsigned n = order(w);
    if (n % 2) return std::nullopt;
    return power(w, n / 2);
  }

  std::optional<Expr> power_to_involution(const Expr& e) const {
    const unsigned n = order(e);
    if (n % 2) return std::nullopt;
    return e.pow(n / 2);
  }

  /// If u has order 2k, returns u^k. For u = t*z with t, z involutions this is
  /// the central involution of the dihedral group <t, z>.
  std::optional<PowerAnnotation> dihedral_even_power(const Word& u) const { return power_to_involution(u); }
  std::optional<Expr> dihedral_even_power(const Expr& u) const { return power_to_involution(u); }

  ClassSignature signature(const Expr& t) const { return signature_of_matrix(to_matrix(t)); }

  ClassSignature signature_of_matrix(const Mat& m) const {
    ClassSignature s;
    s.trace = mat_trace(m);
    s.orders.reserve(probes_.size());
    for (const Mat& p : probes_) s.orders.push_back(order(Expr(mat_mul(m, p))));
    std::sort(s.orders.begin(), s.orders.end());
    return s;
  }

  std::string class_of_involution(const Expr& t) const { return class_of_signature(signature(t)); }

  std::string class_of_signature(const ClassSignature& s) const {
    for (const auto& [label, sig] : pkg_.classes.signatures)
      if (sig == s) return label;
    throw Error(errc::kUnknownSignature, "signature " + format_signature(s) + " is not in the class table");
  }

  Mat to_matrix(const Expr& e) const {
    Mat m = Mat::identity(pkg_.field, pkg_.dim);
    for (const auto& t : e.terms()) {
      if (const auto* x = std::get_if<Mat>(&t)) {
        m = mat_mul(m, *x);
      } else {
        const auto& p = std::get<PowerAnnotation>(t);
        Mat base = Mat::identity(pkg_.field, pkg_.dim);
        for (const Letter& l : p.base.letters()) base = mat_mul(base, letter_matrix(l));
        m = mat_mul(m, mat_pow(base, p.exponent));
      }
    }
    return m;
  }

  Residue trace_of_word(const Expr& e) const { return mat_trace(to_matrix(e)); }

  const Mat& letter_matrix(const Letter& l) const {
    if (const auto* s = std::get_if<Shuttle>(&l)) return shuttle_[s->exp == 1 ? 0 : 1];
    return std::get<IslandElem>(l).matrix;
  }

 private:
  const GroupPackage& pkg_;
  Mat shuttle_[2];
  std::vector<Mat> probes_;
};

}  // namespace pacisle
