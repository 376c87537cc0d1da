#pragma once

// Dense exact linear algebra over a small prime field GF(p), 2 <= p <= 251.
// Vectors are rows; matrices act on the right (v -> v*M).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "random.hpp"

namespace pacisle {

using Residue = std::uint8_t;

inline constexpr std::size_t kMaxDimension = 256;

class FieldSpec {
 public:
  constexpr FieldSpec() = default;
  explicit FieldSpec(unsigned p) : p_(p) {
    if (p < 2 || p > 251 || !is_prime(p))
      throw Error(errc::kInvalidField, "modulus " + std::to_string(p) + " is not a prime in [2, 251]");
  }

  constexpr unsigned p() const noexcept { return p_; }

  Residue add(Residue x, Residue y) const noexcept { return static_cast<Residue>((x + y) % p_); }
  Residue sub(Residue x, Residue y) const noexcept { return static_cast<Residue>((x + p_ - y) % p_); }
  Residue mul(Residue x, Residue y) const noexcept {
    return static_cast<Residue>((static_cast<unsigned>(x) * y) % p_);
  }
  Residue neg(Residue x) const noexcept { return static_cast<Residue>((p_ - x) % p_); }
  Residue inv(Residue x) const {
    if (x == 0) throw Error(errc::kSingularMatrix, "inverse of zero");
    // Fermat: x^(p-2)
    unsigned result = 1, base = x, e = p_ - 2;
    while (e) {
      if (e & 1) result = result * base % p_;
      base = base * base % p_;
      e >>= 1;
    }
    return static_cast<Residue>(result);
  }
  Residue reduce(long long v) const noexcept {
    long long r = v % static_cast<long long>(p_);
    return static_cast<Residue>(r < 0 ? r + p_ : r);
  }

  bool operator==(const FieldSpec&) const = default;

  static constexpr bool is_prime(unsigned n) {
    if (n < 2) return false;
    for (unsigned q = 2; q * q <= n; ++q)
      if (n % q == 0) return false;
    return true;
  }

 private:
  unsigned p_ = 3;
};

class Vec {
 public:
  Vec() = default;
  Vec(FieldSpec f, std::size_t d) : field_(f), e_(d, 0) {}
  Vec(FieldSpec f, std::vector<Residue> entries) : field_(f), e_(std::move(entries)) {
    for (auto& x : e_)
      if (x >= f.p()) throw Error(errc::kParseError, "vector entry out of range");
  }

  const FieldSpec& field() const noexcept { return field_; }
  std::size_t size() const noexcept { return e_.size(); }
  Residue operator[](std::size_t i) const { return e_[i]; }
  Residue& operator[](std::size_t i) { return e_[i]; }
  std::span<const Residue> entries() const noexcept { return e_; }

  bool operator==(const Vec& o) const { return field_ == o.field_ && e_ == o.e_; }

 private:
  FieldSpec field_;
  std::vector<Residue> e_;
};

class Mat {
 public:
  Mat() = default;
  Mat(FieldSpec f, std::size_t d) : field_(f), d_(d), e_(d * d, 0) {}
  Mat(FieldSpec f, std::size_t d, std::vector<Residue> entries)
      : field_(f), d_(d), e_(std::move(entries)) {
    if (e_.size() != d * d) throw Error(errc::kDimensionMismatch, "matrix needs d*d entries");
    for (auto x : e_)
      if (x >= f.p()) throw Error(errc::kParseError, "matrix entry out of range");
  }

  static Mat identity(FieldSpec f, std::size_t d) {
    Mat m(f, d);
    for (std::size_t i = 0; i < d; ++i) m.at(i, i) = 1;
    return m;
  }

  /// Permutation matrix sending basis vector i to basis vector image[i].
  static Mat permutation(FieldSpec f, std::span<const std::size_t> image) {
    Mat m(f, image.size());
    for (std::size_t i = 0; i < image.size(); ++i) m.at(i, image[i]) = 1;
    return m;
  }

  const FieldSpec& field() const noexcept { return field_; }
  std::size_t dim() const noexcept { return d_; }
  Residue at(std::size_t i, std::size_t j) const { return e_[i * d_ + j]; }
  Residue& at(std::size_t i, std::size_t j) { return e_[i * d_ + j]; }
  std::span<const Residue> row(std::size_t i) const { return {e_.data() + i * d_, d_}; }
  std::span<const Residue> entries() const noexcept { return e_; }

  bool is_identity() const {
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j)
        if (at(i, j) != (i == j ? 1 : 0)) return false;
    return true;
  }

  /// Raw entry bytes; usable as a hash key for exact equality.
  std::string key() const { return std::string(e_.begin(), e_.end()); }

  bool operator==(const Mat& o) const { return field_ == o.field_ && d_ == o.d_ && e_ == o.e_; }

 private:
  FieldSpec field_;
  std::size_t d_ = 0;
  std::vector<Residue> e_;
};

namespace detail {

// acc += coeff * row, deferring the reduction mod p. Safe for d <= 256, p <= 251.
inline void axpy(std::vector<std::uint32_t>& acc, Residue coeff, std::span<const Residue> row) {
  for (std::size_t j = 0; j < row.size(); ++j) acc[j] += static_cast<std::uint32_t>(coeff) * row[j];
}

}  // namespace detail

inline Vec vec_apply(const Vec& v, const Mat& m) {
  if (v.size() != m.dim() || !(v.field() == m.field()))
    throw Error(errc::kDimensionMismatch, "vector of length " + std::to_string(v.size()) +
                                              " against matrix of dimension " + std::to_string(m.dim()));
  const std::size_t d = m.dim();
  std::vector<std::uint32_t> acc(d, 0);
  for (std::size_t i = 0; i < d; ++i)
    if (v[i] != 0) detail::axpy(acc, v[i], m.row(i));
  std::vector<Residue> out(d);
  const unsigned p = m.field().p();
  for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<Residue>(acc[j] % p);
  return Vec(m.field(), std::move(out));
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
  if (a.dim() != b.dim() || !(a.field() == b.field()))
    throw Error(errc::kDimensionMismatch, "matrix product of dimensions " + std::to_string(a.dim()) +
                                              " and " + std::to_string(b.dim()));
  const std::size_t d = a.dim();
  const unsigned p = a.field().p();
  std::vector<Residue> out(d * d);
  std::vector<std::uint32_t> acc(d);
  for (std::size_t i = 0; i < d; ++i) {
    std::fill(acc.begin(), acc.end(), 0u);
    auto row = a.row(i);
    for (std::size_t k = 0; k < d; ++k)
      if (row[k] != 0) detail::axpy(acc, row[k], b.row(k));
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = static_cast<Residue>(acc[j] % p);
  }
  return Mat(a.field(), d, std::move(out));
}

inline Mat mat_pow(const Mat& m, unsigned k) {
  Mat result = Mat::identity(m.field(), m.dim());
  Mat base = m;
  while (k) {
    if (k & 1) result = mat_mul(result, base);
    k >>= 1;
    if (k) base = mat_mul(base, base);
  }
  return result;
}

/// Gauss-Jordan elimination mod p.
inline Mat mat_inverse(const Mat& m) {
  const std::size_t d = m.dim();
  const FieldSpec& f = m.field();
  Mat work = m;
  Mat inv = Mat::identity(f, d);
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    while (pivot < d && work.at(pivot, col) == 0) ++pivot;
    if (pivot == d) throw Error(errc::kSingularMatrix, "matrix is not invertible");
    if (pivot != col) {
      for (std::size_t j = 0; j < d; ++j) {
        std::swap(work.at(pivot, j), work.at(col, j));
        std::swap(inv.at(pivot, j), inv.at(col, j));
      }
    }
    const Residue scale = f.inv(work.at(col, col));
    for (std::size_t j = 0; j < d; ++j) {
      work.at(col, j) = f.mul(work.at(col, j), scale);
      inv.at(col, j) = f.mul(inv.at(col, j), scale);
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col || work.at(r, col) == 0) continue;
      const Residue factor = work.at(r, col);
      for (std::size_t j = 0; j < d; ++j) {
        work.at(r, j) = f.sub(work.at(r, j), f.mul(factor, work.at(col, j)));
        inv.at(r, j) = f.sub(inv.at(r, j), f.mul(factor, inv.at(col, j)));
      }
    }
  }
  return inv;
}

inline Residue mat_trace(const Mat& m) {
  unsigned sum = 0;
  for (std::size_t i = 0; i < m.dim(); ++i) sum += m.at(i, i);
  return static_cast<Residue>(sum % m.field().p());
}

inline Vec random_vec(std::size_t d, FieldSpec f, Rng& rng) {
  std::vector<Residue> e(d);
  for (auto& x : e) x = static_cast<Residue>(uniform_below(rng, f.p()));
  return Vec(f, std::move(e));
}

// ---------------------------------------------------------------------------
// Text formats.
//   matrix <name> <d>
//   <d rows: d single digits when p <= 7, else space-separated residues>

inline bool compact_digits(FieldSpec f) { return f.p() <= 7; }

inline std::string format_residues(std::span<const Residue> xs, FieldSpec f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (compact_digits(f)) {
      out.push_back(static_cast<char>('0' + xs[i]));
    } else {
      if (i) out.push_back(' ');
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

inline std::string format_vec(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(v[i]);
  }
  return out;
}

inline Vec parse_vec(const std::string& text, FieldSpec f) {
  std::istringstream in(text);
  std::vector<Residue> e;
  long long x;
  while (in >> x) {
    if (x < 0 || x >= static_cast<long long>(f.p()))
      throw Error(errc::kParseError, "vector entry " + std::to_string(x) + " out of range");
    e.push_back(static_cast<Residue>(x));
  }
  if (!in.eof()) throw Error(errc::kParseError, "malformed vector '" + text + "'");
  return Vec(f, std::move(e));
}

/// Parses one row of a matrix block (digits or decimals depending on p).
inline std::vector<Residue> parse_row(const std::string& line, std::size_t d, FieldSpec f) {
  std::vector<Residue> row;
  if (compact_digits(f) && line.find(' ') == std::string::npos) {
    for (char c : line) {
      if (c == '\r') continue;
      if (c < '0' || c > '9') throw Error(errc::kParseError, "bad matrix digit in '" + line + "'");
      row.push_back(static_cast<Residue>(c - '0'));
    }
  } else {
    const Vec v = parse_vec(line, f);
    row.assign(v.entries().begin(), v.entries().end());
  }
  if (row.size() != d) throw Error(errc::kParseError, "matrix row has wrong length: '" + line + "'");
  for (auto x : row)
    if (x >= f.p()) throw Error(errc::kParseError, "matrix entry out of range");
  return row;
}

inline void write_matrix(std::ostream& os, const std::string& name, const Mat& m) {
  os << "matrix " << name << ' ' << m.dim() << '\n';
  for (std::size_t i = 0; i < m.dim(); ++i) os << format_residues(m.row(i), m.field()) << '\n';
}

/// Reads the d rows following a `matrix <name> <d>` header.
inline Mat read_matrix_rows(std::istream& is, std::size_t d, FieldSpec f) {
  if (d == 0 || d > kMaxDimension)
    throw Error(errc::kDimensionMismatch, "dimension " + std::to_string(d) + " outside [1, 256]");
  std::vector<Residue> e;
  e.reserve(d * d);
  std::string line;
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::getline(is, line)) throw Error(errc::kParseError, "truncated matrix block");
    auto row = parse_row(line, d, f);
    e.insert(e.end(), row.begin(), row.end());
  }
  return Mat(f, d, std::move(e));
}

}  // namespace pacisle
