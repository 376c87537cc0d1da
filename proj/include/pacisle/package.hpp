#pragma once

// In-memory form of a group package: everything the engine needs to compute
// in one surrogate group. The brute-force oracle is deliberately not part of it.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "island_elem.hpp"
#include "linalg.hpp"
#include "word.hpp"

namespace pacisle {

/// Concatenated anchor images (v1*M, v2*M), one byte per residue.
using Fingerprint = std::string;

struct AnchorPair {
  Vec v1;
  Vec v2;
};

inline Fingerprint fingerprint_from_images(const Vec& i1, const Vec& i2) {
  Fingerprint fp;
  fp.reserve(i1.size() + i2.size());
  for (auto x : i1.entries()) fp.push_back(static_cast<char>(x));
  for (auto x : i2.entries()) fp.push_back(static_cast<char>(x));
  return fp;
}

inline Fingerprint fingerprint_of(const Mat& m, const AnchorPair& anchors) {
  return fingerprint_from_images(vec_apply(anchors.v1, m), vec_apply(anchors.v2, m));
}

inline std::string render_fingerprint(const Fingerprint& fp, FieldSpec f) {
  std::vector<Residue> xs(fp.begin(), fp.end());
  return format_residues(xs, f);
}

/// Parses a rendered fingerprint from the front of `in`; `d` is the dimension.
inline Fingerprint parse_fingerprint(std::istream& in, std::size_t d, FieldSpec f) {
  Fingerprint fp;
  if (compact_digits(f)) {
    std::string digits;
    in >> digits;
    if (digits.size() != 2 * d) throw Error(errc::kParseError, "fingerprint '" + digits + "' has wrong length");
    for (char c : digits) {
      if (c < '0' || c >= static_cast<char>('0' + f.p())) throw Error(errc::kParseError, "bad fingerprint digit");
      fp.push_back(static_cast<char>(c - '0'));
    }
  } else {
    for (std::size_t i = 0; i < 2 * d; ++i) {
      unsigned x;
      if (!(in >> x) || x >= f.p()) throw Error(errc::kParseError, "bad fingerprint entry");
      fp.push_back(static_cast<char>(x));
    }
  }
  return fp;
}

struct ClassSignature {
  Residue trace = 0;
  std::vector<unsigned> orders;  // sorted
  auto operator<=>(const ClassSignature&) const = default;
};

inline std::string format_signature(const ClassSignature& s) {
  std::string out = std::to_string(s.trace) + " :";
  for (unsigned o : s.orders) out += " " + std::to_string(o);
  return out;
}

inline ClassSignature parse_signature(const std::string& text) {
  std::istringstream in(text);
  ClassSignature s;
  unsigned trace;
  std::string colon;
  if (!(in >> trace >> colon) || colon != ":") throw Error(errc::kParseError, "bad signature '" + text + "'");
  s.trace = static_cast<Residue>(trace);
  unsigned o;
  while (in >> o) s.orders.push_back(o);
  return s;
}

struct ClassInvariantTable {
  std::vector<std::string> probe_words;               // word text
  std::map<std::string, ClassSignature> signatures;   // involution class label -> signature
};

struct PostEntry {
  std::string label;     // island class label, "x1" is the class of z
  std::string rep_name;  // matrix name of the representative
  Word tail;             // rep^tail = z
};

struct MembershipTable {
  std::vector<std::pair<Fingerprint, GenWord>> entries;  // shortlex order of words
  std::unordered_map<Fingerprint, std::size_t> index;

  void add(Fingerprint fp, GenWord w) {
    index.emplace(fp, entries.size());
    entries.emplace_back(std::move(fp), std::move(w));
  }
  const GenWord* find(const Fingerprint& fp) const {
    auto it = index.find(fp);
    return it == index.end() ? nullptr : &entries[it->second].second;
  }
};

struct KernelData {
  std::vector<std::string> basis_names;
  unsigned exponent = 2;
  std::vector<std::size_t> probe_in;   // 0-based
  std::vector<std::size_t> probe_out;  // 0-based
  std::map<std::string, GenWord> quotient_map;  // extraction key -> coset representative word
};

struct PackageMetadata {
  std::uint64_t group_order = 0;
  std::uint64_t island_order = 0;
  std::uint64_t k_class_size = 0;
  std::size_t letter_bytes = 0;
  unsigned z_zT_order = 0;  // order of z * z^T
};

inline std::uint64_t package_id_for(const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h ? h : 1;
}

struct GroupPackage {
  std::string name;
  FieldSpec field;
  std::size_t dim = 0;
  std::map<std::string, Mat> matrices;  // always holds a, b, z, T
  AnchorPair anchors;
  unsigned max_order = 0;
  std::string class_k;
  ClassInvariantTable classes;
  std::vector<PostEntry> post;
  MembershipTable membership;
  std::optional<KernelData> kernel;
  PackageMetadata meta;

  std::uint64_t id() const { return package_id_for(name); }

  const Mat& matrix(const std::string& n) const {
    auto it = matrices.find(n);
    if (it == matrices.end()) throw Error(errc::kParseError, "package has no matrix named '" + n + "'");
    return it->second;
  }
  const Mat& gen_a() const { return matrix("a"); }
  const Mat& gen_b() const { return matrix("b"); }
  const Mat& z() const { return matrix("z"); }
  const Mat& shuttle() const { return matrix("T"); }
};

}  // namespace pacisle
