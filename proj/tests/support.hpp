#pragma once

// Shared fixtures: reference packages built once per process (and
// round-tripped through disk), plus a permutation evaluator that does not
// touch the engine. REF-A and REF-B are permutation groups, so their words
// can be checked by composing permutations.

#include <filesystem>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pacisle/pacisle.hpp"

namespace support {

using namespace pacisle;

inline std::filesystem::path spec_path(const std::string& name) {
  return std::filesystem::path(PACISLE_SPEC_DIR) / (name + ".spec");
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::path(PACISLE_SCRATCH_DIR) / name;
  std::filesystem::create_directories(p);
  return p;
}

struct Ref {
  BuildResult built;
  std::filesystem::path dir;
  std::unique_ptr<Runtime> rt;

  const GroupPackage& pkg() const { return rt->package(); }
  const ActionEngine& act() const { return rt->action(); }
  const IslandKit& kit() const { return rt->kit(); }
  const Shortener& shortener() const { return rt->shortener(); }
  const BruteForceOracle& oracle() const { return built.oracle; }
};

/// "ref_a", "ref_b", "ref_c".
inline const Ref& ref(const std::string& name) {
  static std::map<std::string, std::unique_ptr<Ref>> cache;
  auto& slot = cache[name];
  if (!slot) {
    slot = std::make_unique<Ref>();
    slot->built = build_package(load_group_spec(spec_path(name)));
    slot->dir = scratch_dir("pkg_" + name);
    save_package(slot->built.package, slot->dir);
    save_oracle(slot->built.oracle, slot->dir);
    slot->rt = load_runtime(slot->dir);
  }
  return *slot;
}

// --- permutations, 0-based images -------------------------------------------

using Perm = std::vector<std::size_t>;

inline Perm identity_perm(std::size_t n) {
  Perm p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

/// "(1,2)(3,4)", 1-based points.
inline Perm cycles(std::size_t n, const std::string& text) {
  Perm p = identity_perm(n);
  std::size_t pos = 0;
  while ((pos = text.find('(', pos)) != std::string::npos) {
    const auto close = text.find(')', pos);
    std::string body = text.substr(pos + 1, close - pos - 1);
    for (char& c : body)
      if (c == ',') c = ' ';
    std::istringstream in(body);
    std::vector<std::size_t> cyc;
    std::size_t x;
    while (in >> x) cyc.push_back(x - 1);
    for (std::size_t i = 0; i < cyc.size(); ++i) p[cyc[i]] = cyc[(i + 1) % cyc.size()];
    pos = close;
  }
  return p;
}

/// p first, then q.
inline Perm compose(const Perm& p, const Perm& q) {
  Perm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = q[p[i]];
  return r;
}

inline Perm inverse(const Perm& p) {
  Perm r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = i;
  return r;
}

inline unsigned perm_order(const Perm& p) {
  unsigned ord = 1;
  std::vector<bool> seen(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    unsigned len = 0;
    for (std::size_t j = i; !seen[j]; j = p[j]) {
      seen[j] = true;
      ++len;
    }
    ord = std::lcm(ord, len);
  }
  return ord;
}

inline std::vector<unsigned> cycle_type(const Perm& p) {
  std::vector<unsigned> t;
  std::vector<bool> seen(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    unsigned len = 0;
    for (std::size_t j = i; !seen[j]; j = p[j]) {
      seen[j] = true;
      ++len;
    }
    t.push_back(len);
  }
  std::sort(t.begin(), t.end());
  return t;
}

/// Reads a permutation matrix back (row i has its 1 in column p[i]).
inline Perm perm_of(const Mat& m) {
  Perm p(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (m.at(i, j) == 1) {
        p[i] = j;
        ++hits;
      } else if (m.at(i, j) != 0) {
        throw std::logic_error("not a permutation matrix");
      }
    }
    if (hits != 1) throw std::logic_error("not a permutation matrix");
  }
  return p;
}

/// Permutation of a word, built from the package's a, b and T only: island
/// letters go through their membership word.
inline Perm eval_perm(const Word& w, const GroupPackage& pkg) {
  const Perm a = perm_of(pkg.gen_a()), b = perm_of(pkg.gen_b()), t = perm_of(pkg.shuttle());
  const Perm gens[4] = {a, inverse(a), b, inverse(b)};
  Perm r = identity_perm(pkg.dim);
  for (const Letter& l : w.letters()) {
    if (const auto* s = std::get_if<Shuttle>(&l)) {
      r = compose(r, t);
      if (s->exp == 2) r = compose(r, t);
    } else {
      const auto& x = std::get<IslandElem>(l);
      const GenWord* gw = pkg.membership.find(fingerprint_of(x.matrix, pkg.anchors));
      if (!gw) throw std::logic_error("island letter outside the membership table");
      for (Gen g : *gw) r = compose(r, gens[static_cast<int>(g)]);
    }
  }
  return r;
}

inline Fingerprint fp_of_perm(const Perm& p, const GroupPackage& pkg) {
  return fingerprint_of(Mat::permutation(pkg.field, p), pkg.anchors);
}

inline Mat plain_product(const Word& w, const GroupPackage& pkg) {
  Mat m = Mat::identity(pkg.field, pkg.dim);
  const Mat t2 = mat_mul(pkg.shuttle(), pkg.shuttle());
  for (const Letter& l : w.letters()) {
    if (const auto* s = std::get_if<Shuttle>(&l))
      m = mat_mul(m, s->exp == 1 ? pkg.shuttle() : t2);
    else
      m = mat_mul(m, std::get<IslandElem>(l).matrix);
  }
  return m;
}

inline bool is_permutation_package(const GroupPackage& pkg) {
  try {
    perm_of(pkg.gen_a());
    perm_of(pkg.gen_b());
    perm_of(pkg.shuttle());
    return true;
  } catch (const std::logic_error&) {
    return false;
  }
}

/// Fingerprint of a word computed without the engine: permutations when the
/// package is a permutation representation, plain matrix products otherwise.
inline Fingerprint reference_fp(const Word& w, const GroupPackage& pkg) {
  if (is_permutation_package(pkg)) return fp_of_perm(eval_perm(w, pkg), pkg);
  return fingerprint_of(plain_product(w, pkg), pkg.anchors);
}

/// Random input word of reduced length in [lo, hi].
inline Word random_input(const Ref& r, Rng& rng, std::size_t lo = 30, std::size_t hi = 60) {
  return r.kit().random_word(lo + uniform_below(rng, hi - lo + 1), rng);
}

}  // namespace support
