#pragma once

// Package builder and verifier. The builder enumerates the whole surrogate
// group by breadth-first search, derives every table the engine needs, and
// emits a brute-force oracle that only the verifier and the tests consult.

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "action.hpp"
#include "island_kit.hpp"
#include "package.hpp"
#include "package_io.hpp"
#include "runtime.hpp"
#include "word_io.hpp"

namespace pacisle {

// ---------------------------------------------------------------------------
// Group spec files
//
//   name = REF-A
//   field = 3
//   dim = 4
//   a = perm (1,2)            island generators, z, T: `perm <cycles>`,
//   b = perm (1,3,2,4)        `matrix <block-name>` (a `matrix` block in the
//   z = perm (1,2)(3,4)       same file), or `search` for T
//   T = perm (2,3,4)
//   anchor1 = 0 1 2 0         optional; searched for when absent
//   anchor2 = 1 0 0 2
//   group_order = 24          required when T = search
//   basis = pairs             optional change of basis (e_2k +- e_2k+1)
//   kernel = perm (1,2) | perm (3,4)   optional kernel data
//   kernel_exponent = 2
//   probe_in = 1 2
//   probe_out = 1 2

struct GroupSpec {
  std::string name;
  FieldSpec field;
  std::size_t dim = 0;
  Mat a, b, z;
  std::optional<Mat> shuttle;  // absent: search
  std::optional<AnchorPair> anchors;
  std::optional<std::uint64_t> group_order;
  std::uint64_t max_group_order = 1000000;
  std::uint64_t seed = 1;
  std::optional<Mat> basis;  // rows = new basis vectors in old coordinates
  std::vector<Mat> kernel_basis;
  unsigned kernel_exponent = 2;
  std::vector<std::size_t> probe_in, probe_out;
};

namespace detail {

inline std::vector<std::size_t> parse_cycles(const std::string& text, std::size_t dim) {
  std::vector<std::size_t> image(dim);
  std::iota(image.begin(), image.end(), 0);
  std::vector<bool> used(dim, false);
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    if (text[pos] != '(') throw Error(errc::kInvalidSpec, "bad permutation '" + text + "'");
    const auto close = text.find(')', pos);
    if (close == std::string::npos) throw Error(errc::kInvalidSpec, "unclosed cycle in '" + text + "'");
    std::string body = text.substr(pos + 1, close - pos - 1);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream in(body);
    std::vector<std::size_t> cyc;
    std::size_t x;
    while (in >> x) {
      if (x == 0 || x > dim || used[x - 1]) throw Error(errc::kInvalidSpec, "bad point in '" + text + "'");
      used[x - 1] = true;
      cyc.push_back(x - 1);
    }
    for (std::size_t i = 0; i < cyc.size(); ++i) image[cyc[i]] = cyc[(i + 1) % cyc.size()];
    pos = close + 1;
  }
  return image;
}

inline Mat pairs_basis(FieldSpec f, std::size_t dim) {
  if (dim % 2) throw Error(errc::kInvalidSpec, "basis = pairs needs an even dimension");
  Mat q(f, dim);
  const std::size_t h = dim / 2;
  for (std::size_t k = 0; k < h; ++k) {
    q.at(k, 2 * k) = 1;
    q.at(k, 2 * k + 1) = 1;
    q.at(h + k, 2 * k) = 1;
    q.at(h + k, 2 * k + 1) = f.neg(1);
  }
  return q;
}

}  // namespace detail

inline GroupSpec parse_group_spec(const std::string& text) {
  using namespace detail;
  std::map<std::string, std::string> kv;
  std::map<std::string, std::pair<std::size_t, std::vector<std::string>>> blocks;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (line.rfind("matrix ", 0) == 0) {
        std::istringstream h(line);
        std::string kw, name;
        std::size_t d = 0;
        h >> kw >> name >> d;
        std::vector<std::string> rows;
        for (std::size_t i = 0; i < d && std::getline(in, line); ++i) rows.push_back(trim(line));
        blocks[name] = {d, rows};
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(errc::kInvalidSpec, "expected 'key = value': " + line);
      std::string value = trim(line.substr(eq + 1));
      if (auto hash = value.find('#'); hash != std::string::npos) value = trim(value.substr(0, hash));
      kv[trim(line.substr(0, eq))] = value;
    }
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw Error(errc::kInvalidSpec, "spec is missing '" + k + "'");
    return it->second;
  };

  GroupSpec s;
  s.name = need("name");
  s.field = FieldSpec(static_cast<unsigned>(to_u64(need("field"), "field")));
  s.dim = to_u64(need("dim"), "dim");
  if (s.dim == 0 || s.dim > kMaxDimension) throw Error(errc::kInvalidSpec, "dimension outside [1, 256]");

  auto element = [&](const std::string& value) -> Mat {
    std::istringstream in(value);
    std::string kind;
    in >> kind;
    std::string rest;
    std::getline(in, rest);
    rest = trim(rest);
    if (kind == "perm") return Mat::permutation(s.field, parse_cycles(rest, s.dim));
    if (kind == "matrix") {
      auto it = blocks.find(rest);
      if (it == blocks.end()) throw Error(errc::kInvalidSpec, "no matrix block named '" + rest + "'");
      std::ostringstream joined;
      for (const auto& r : it->second.second) joined << r << '\n';
      std::istringstream rows(joined.str());
      if (it->second.first != s.dim) throw Error(errc::kInvalidSpec, "matrix block has wrong dimension");
      return read_matrix_rows(rows, s.dim, s.field);
    }
    throw Error(errc::kInvalidSpec, "cannot parse element '" + value + "'");
  };

  s.a = element(need("a"));
  s.b = element(need("b"));
  s.z = element(need("z"));
  if (need("T") != "search") s.shuttle = element(need("T"));
  if (kv.count("anchor1") || kv.count("anchor2"))
    s.anchors = AnchorPair{parse_vec(need("anchor1"), s.field), parse_vec(need("anchor2"), s.field)};
  if (kv.count("group_order")) s.group_order = to_u64(kv["group_order"], "group_order");
  if (kv.count("max_group_order")) s.max_group_order = to_u64(kv["max_group_order"], "max_group_order");
  if (kv.count("seed")) s.seed = to_u64(kv["seed"], "seed");
  if (!s.shuttle && !s.group_order) throw Error(errc::kInvalidSpec, "T = search needs group_order");
  if (kv.count("basis")) {
    if (kv["basis"] != "pairs") throw Error(errc::kInvalidSpec, "unknown basis '" + kv["basis"] + "'");
    s.basis = pairs_basis(s.field, s.dim);
  }
  if (kv.count("kernel")) {
    std::string all = kv["kernel"];
    std::size_t start = 0;
    while (start <= all.size()) {
      auto bar = all.find('|', start);
      std::string piece = trim(all.substr(start, bar == std::string::npos ? std::string::npos : bar - start));
      if (!piece.empty()) s.kernel_basis.push_back(element(piece));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    s.kernel_exponent = static_cast<unsigned>(to_u64(need("kernel_exponent"), "kernel_exponent"));
    std::istringstream pin(need("probe_in")), pout(need("probe_out"));
    s.probe_in = parse_indices(pin, s.dim);
    s.probe_out = parse_indices(pout, s.dim);
    if (s.probe_in.size() != s.probe_out.size() || s.probe_in.empty())
      throw Error(errc::kInvalidSpec, "probe_in and probe_out must be non-empty and of equal size");
  }
  return s;
}

inline GroupSpec load_group_spec(const std::filesystem::path& p) { return parse_group_spec(detail::read_text_file(p)); }

// ---------------------------------------------------------------------------
// Brute-force oracle: every element of the group, keyed by fingerprint.

struct OracleEntry {
  Fingerprint fp;
  std::string word;  // minimal word over a, a^-1, b, b^-1, T, T^-1 in word text format
  unsigned order = 0;
  std::string cls;
};

struct BruteForceOracle {
  FieldSpec field;
  std::size_t dim = 0;
  std::vector<OracleEntry> entries;
  std::unordered_map<Fingerprint, std::size_t> index;

  void add(OracleEntry e) {
    index.emplace(e.fp, entries.size());
    entries.push_back(std::move(e));
  }
  const OracleEntry* find(const Fingerprint& fp) const {
    auto it = index.find(fp);
    return it == index.end() ? nullptr : &entries[it->second];
  }
};

inline void save_oracle(const BruteForceOracle& o, const std::filesystem::path& dir) {
  std::ostringstream m;
  for (const auto& e : o.entries) {
    m << render_fingerprint(e.fp, o.field) << ' ' << e.order << ' ' << e.cls;
    if (!e.word.empty()) m << ' ' << e.word;
    m << '\n';
  }
  detail::write_text_file(dir / "oracle.txt", m.str());
}

inline BruteForceOracle load_oracle(const std::filesystem::path& dir, FieldSpec f, std::size_t dim) {
  BruteForceOracle o;
  o.field = f;
  o.dim = dim;
  std::istringstream in(detail::read_text_file(dir / "oracle.txt"));
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::istringstream ls(line);
    OracleEntry e;
    e.fp = parse_fingerprint(ls, dim, f);
    if (!(ls >> e.order >> e.cls)) throw Error(errc::kParseError, "bad oracle line: " + line);
    std::getline(ls, e.word);
    e.word = detail::trim(e.word);
    o.add(std::move(e));
  }
  return o;
}

// ---------------------------------------------------------------------------

struct BuildResult {
  GroupPackage package;
  BruteForceOracle oracle;
  std::vector<std::string> report;
};

namespace detail {

// Letters 0..3 are a, a^-1, b, b^-1 (matching Gen); 4, 5 are T, T^-1.
struct Enumeration {
  std::vector<Mat> elems;
  std::vector<std::size_t> parent;
  std::vector<std::uint8_t> letter;
  std::unordered_map<std::string, std::size_t> index;

  std::vector<std::uint8_t> word(std::size_t i) const {
    std::vector<std::uint8_t> w;
    while (i != 0) {
      w.push_back(letter[i]);
      i = parent[i];
    }
    std::reverse(w.begin(), w.end());
    return w;
  }
  std::optional<std::size_t> find(const Mat& m) const {
    auto it = index.find(m.key());
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

// BFS from the identity; words come out shortlex-minimal in letter order.
inline Enumeration enumerate(const std::vector<Mat>& gens, std::uint64_t cap) {
  Enumeration e;
  const Mat id = Mat::identity(gens.front().field(), gens.front().dim());
  e.index.emplace(id.key(), 0);
  e.elems.push_back(id);
  e.parent.push_back(0);
  e.letter.push_back(0);
  for (std::size_t head = 0; head < e.elems.size(); ++head) {
    for (std::size_t g = 0; g < gens.size(); ++g) {
      Mat y = mat_mul(e.elems[head], gens[g]);
      auto key = y.key();
      if (e.index.count(key)) continue;
      if (e.elems.size() >= cap)
        throw Error(errc::kGroupTooLarge, "group has more than " + std::to_string(cap) + " elements");
      e.index.emplace(std::move(key), e.elems.size());
      e.elems.push_back(std::move(y));
      e.parent.push_back(head);
      e.letter.push_back(static_cast<std::uint8_t>(g));
    }
  }
  return e;
}

inline std::string word_text(const std::vector<std::uint8_t>& w) {
  std::string out, island;
  auto flush = [&] {
    if (island.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += "g:" + island;
    island.clear();
  };
  for (auto l : w) {
    if (l < 4) {
      island.push_back(gen_char(static_cast<Gen>(l)));
    } else {
      flush();
      if (!out.empty()) out.push_back(' ');
      out += l == 4 ? "T" : "T-";
    }
  }
  flush();
  return out;
}

inline GenWord to_gen_word(const std::vector<std::uint8_t>& w) {
  GenWord g;
  for (auto l : w) g.push_back(static_cast<Gen>(l));
  return g;
}

inline bool fixes(const Vec& v, const Mat& m) {
  const std::size_t d = m.dim();
  const unsigned p = m.field().p();
  for (std::size_t j = 0; j < d; ++j) {
    unsigned s = 0;
    for (std::size_t i = 0; i < d; ++i) s += static_cast<unsigned>(v[i]) * m.at(i, j);
    if (s % p != v[j]) return false;
  }
  return true;
}

inline Mat conj(const Mat& x, const Mat& g, const Mat& g_inv) { return mat_mul(mat_mul(g_inv, x), g); }

struct UnionFind {
  std::vector<std::size_t> up;
  explicit UnionFind(std::size_t n) : up(n) { std::iota(up.begin(), up.end(), 0); }
  std::size_t find(std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  }
  void unite(std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x != y) up[std::max(x, y)] = std::min(x, y);
  }
};

inline std::string letter_suffix(std::size_t k) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('A' + k % 26));
    k /= 26;
  } while (k-- > 0);
  return s;
}

// Candidate shuttles for `T = search`: 3-cycles in lexicographic order of
// (i, j, k) with i the smallest point, then products of two disjoint 3-cycles.
inline std::vector<std::vector<std::size_t>> shuttle_candidates(std::size_t n) {
  std::vector<std::array<std::size_t, 3>> cycles;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = i + 1; k < n; ++k)
        if (k != j) cycles.push_back({i, j, k});
  std::sort(cycles.begin(), cycles.end());
  auto apply = [](std::vector<std::size_t>& img, const std::array<std::size_t, 3>& c) {
    img[c[0]] = c[1];
    img[c[1]] = c[2];
    img[c[2]] = c[0];
  };
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : cycles) {
    std::vector<std::size_t> img(n);
    std::iota(img.begin(), img.end(), 0);
    apply(img, c);
    out.push_back(std::move(img));
  }
  for (std::size_t x = 0; x < cycles.size(); ++x)
    for (std::size_t y = x + 1; y < cycles.size(); ++y) {
      const auto& c1 = cycles[x];
      const auto& c2 = cycles[y];
      if (c2[0] <= c1[0]) continue;
      bool disjoint = true;
      for (auto p : c1)
        for (auto q : c2) disjoint &= p != q;
      if (!disjoint) continue;
      std::vector<std::size_t> img(n);
      std::iota(img.begin(), img.end(), 0);
      apply(img, c1);
      apply(img, c2);
      out.push_back(std::move(img));
    }
  return out;
}

inline Mat change_basis(const Mat& m, const std::optional<Mat>& q, const std::optional<Mat>& q_inv) {
  if (!q) return m;
  return mat_mul(mat_mul(*q, m), *q_inv);
}

inline BuildResult build_with_shuttle(const GroupSpec& spec, const Mat& shuttle, std::uint64_t cap) {
  const FieldSpec f = spec.field;
  const std::size_t d = spec.dim;
  const Mat id = Mat::identity(f, d);
  const Mat& a = spec.a;
  const Mat& b = spec.b;
  const Mat& z = spec.z;
  const Mat& t = shuttle;
  for (const Mat* m : {&a, &b, &z, &t})
    if (m->dim() != d) throw Error(errc::kInvalidSpec, "generator has wrong dimension");

  if (t.is_identity()) throw Error(errc::kInvalidSpec, "T must not be the identity");
  if (!mat_pow(t, 3).is_identity()) throw Error(errc::kInvalidSpec, "T^3 is not the identity");
  if (z.is_identity() || !mat_mul(z, z).is_identity()) throw Error(errc::kInvalidSpec, "z is not an involution");
  if (!(mat_mul(z, a) == mat_mul(a, z)) || !(mat_mul(z, b) == mat_mul(b, z)))
    throw Error(errc::kInvalidSpec, "z is not central in <a, b>");

  const Mat a_inv = mat_inverse(a), b_inv = mat_inverse(b), t_inv = mat_mul(t, t);
  const std::vector<Mat> island_gens{a, a_inv, b, b_inv};
  const std::vector<Mat> all_gens{a, a_inv, b, b_inv, t, t_inv};

  Enumeration island = enumerate(island_gens, cap);
  if (!island.find(z)) throw Error(errc::kInvalidSpec, "z does not lie in <a, b>");
  Enumeration group = enumerate(all_gens, cap);
  const std::size_t n = group.elems.size();
  if (spec.group_order && *spec.group_order != n)
    throw Error(errc::kGroupOrderMismatch,
                "<a, b, T> has order " + std::to_string(n) + ", declared " + std::to_string(*spec.group_order));

  std::size_t centralizer = 0;
  const Mat z_key_m = z;
  for (const Mat& x : group.elems)
    if (mat_mul(x, z_key_m) == mat_mul(z_key_m, x)) ++centralizer;
  if (centralizer != island.elems.size())
    throw Error(errc::kIslandNotCentralizer, "C(z) has order " + std::to_string(centralizer) + " but <a, b> has order " +
                                                  std::to_string(island.elems.size()));

  // Orders.
  std::vector<unsigned> order(n, 1);
  unsigned max_order = 1;
  for (std::size_t i = 0; i < n; ++i) {
    Mat y = group.elems[i];
    unsigned k = 1;
    while (!y.is_identity()) {
      y = mat_mul(y, group.elems[i]);
      ++k;
    }
    order[i] = k;
    max_order = std::max(max_order, k);
  }

  // Conjugacy classes: close under conjugation by a, b, T.
  UnionFind uf(n);
  const std::array<std::pair<const Mat*, const Mat*>, 3> conj_by{
      std::pair{&a, &a_inv}, std::pair{&b, &b_inv}, std::pair{&t, &t_inv}};
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [g, gi] : conj_by) uf.unite(i, *group.find(conj(group.elems[i], *g, *gi)));
  std::map<std::size_t, std::vector<std::size_t>> class_members;
  for (std::size_t i = 0; i < n; ++i) class_members[uf.find(i)].push_back(i);
  struct ClassInfo {
    unsigned order;
    std::size_t size, first;
    std::string label;
  };
  std::vector<ClassInfo> classes;
  for (const auto& [root, members] : class_members) classes.push_back({order[root], members.size(), members.front(), {}});
  std::sort(classes.begin(), classes.end(), [](const ClassInfo& x, const ClassInfo& y) {
    return std::tie(x.order, x.size, x.first) < std::tie(y.order, y.size, y.first);
  });
  std::map<std::size_t, std::string> label_of_root;
  {
    std::map<unsigned, std::size_t> next_letter;
    for (auto& c : classes) {
      c.label = std::to_string(c.order) + letter_suffix(next_letter[c.order]++);
      label_of_root[uf.find(c.first)] = c.label;
    }
  }
  std::vector<std::string> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = label_of_root[uf.find(i)];
  const std::size_t z_index = *group.find(z);
  const std::string class_k = cls[z_index];

  // Anchors: given, or searched for with a seeded generator. Certification
  // is a full sweep: distinct fingerprints for all n elements.
  std::vector<std::size_t> prime_order;
  for (std::size_t i = 1; i < n; ++i)
    if (FieldSpec::is_prime(order[i])) prime_order.push_back(i);
  auto certify = [&](const AnchorPair& ap) {
    std::unordered_set<Fingerprint> seen;
    for (const Mat& x : group.elems)
      if (!seen.insert(fingerprint_of(x, ap)).second) return false;
    return true;
  };
  AnchorPair anchors;
  if (spec.anchors) {
    anchors = *spec.anchors;
    if (anchors.v1.size() != d || anchors.v2.size() != d) throw Error(errc::kInvalidSpec, "anchor length mismatch");
    if (!certify(anchors)) throw Error(errc::kNoAnchorsFound, "given anchors have a nontrivial joint stabilizer");
  } else {
    Rng rng(spec.seed);
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      anchors = AnchorPair{random_vec(d, f, rng), random_vec(d, f, rng)};
      // A nontrivial stabilizer contains an element of prime order.
      bool fixed = false;
      for (std::size_t i : prime_order)
        if (fixes(anchors.v1, group.elems[i]) && fixes(anchors.v2, group.elems[i])) {
          fixed = true;
          break;
        }
      ok = !fixed && certify(anchors);
    }
    if (!ok) throw Error(errc::kNoAnchorsFound, "no anchor pair with trivial joint stabilizer in 10000 candidates");
  }
  std::vector<Fingerprint> fps(n);
  for (std::size_t i = 0; i < n; ++i) fps[i] = fingerprint_of(group.elems[i], anchors);

  // Class signatures for involutions: trace plus sorted orders of t*p over a
  // probe set that is a union of whole conjugacy classes (so the multiset is
  // a class invariant). Try the empty set, then single classes by size.
  std::vector<std::size_t> involutions;
  for (std::size_t i = 0; i < n; ++i)
    if (order[i] == 2) involutions.push_back(i);
  std::vector<std::vector<std::size_t>> probe_candidates{{}};
  for (const auto& c : classes) {
    if (c.order == 1) continue;
    probe_candidates.push_back(class_members[uf.find(c.first)]);
  }
  std::vector<std::size_t> probes;
  std::map<std::string, ClassSignature> signatures;
  bool separated = false;
  for (const auto& cand : probe_candidates) {
    std::map<std::string, ClassSignature> sig_of;
    bool consistent = true;
    for (std::size_t i : involutions) {
      ClassSignature s;
      s.trace = mat_trace(group.elems[i]);
      for (std::size_t p : cand) s.orders.push_back(order[*group.find(mat_mul(group.elems[i], group.elems[p]))]);
      std::sort(s.orders.begin(), s.orders.end());
      auto [it, fresh] = sig_of.emplace(cls[i], s);
      if (!fresh && !(it->second == s)) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    std::set<ClassSignature> distinct;
    for (const auto& [_, s] : sig_of) distinct.insert(s);
    if (distinct.size() != sig_of.size()) continue;
    probes = cand;
    signatures = std::move(sig_of);
    separated = true;
    break;
  }
  if (!separated) throw Error(errc::kInvalidSpec, "no probe class separates the involution classes");

  // Island data.
  const std::size_t island_n = island.elems.size();
  std::vector<std::size_t> island_in_group(island_n);
  for (std::size_t i = 0; i < island_n; ++i) island_in_group[i] = *group.find(island.elems[i]);

  // Island involutions in class K, grouped into island classes.
  std::unordered_map<std::string, std::size_t> k_inv;  // key -> island index
  for (std::size_t i = 0; i < island_n; ++i) {
    const std::size_t gi = island_in_group[i];
    if (order[gi] == 2 && cls[gi] == class_k) k_inv.emplace(island.elems[i].key(), i);
  }
  UnionFind iuf(island_n);
  for (const auto& [key, i] : k_inv)
    for (const auto& [g, gi] : {std::pair{&a, &a_inv}, std::pair{&b, &b_inv}})
      iuf.unite(i, k_inv.at(conj(island.elems[i], *g, *gi).key()));
  std::set<std::size_t> island_classes;
  for (const auto& [key, i] : k_inv) island_classes.insert(iuf.find(i));

  // Changing-post tails. Shapes T^e, g T^e, T^e g T^f, g T^e g T^f in order
  // of length, then lexicographically with T^-1 before T and island letters
  // in shortlex order. The first tail u reaching a new island class fixes
  // that class's representative x = u z u^-1.
  std::map<std::size_t, Mat> assigned;  // island class -> representative
  std::map<std::size_t, std::string> tail_text;
  const std::size_t z_island = *island.find(z);
  assigned[iuf.find(z_island)] = z;
  tail_text[iuf.find(z_island)] = "";
  const std::array<std::pair<int, const Mat*>, 2> shuttles{std::pair{-1, &t_inv}, std::pair{1, &t}};
  auto sh = [](int e) { return e > 0 ? std::string("T") : std::string("T-"); };
  auto gword = [&](std::size_t g) { return "g:" + gen_word_chars(to_gen_word(island.word(g))); };
  auto done = [&] { return assigned.size() == island_classes.size(); };
  auto try_text = [&](const Mat& u, const std::string& text) {
    const Mat x = mat_mul(mat_mul(u, z), mat_inverse(u));
    auto it = k_inv.find(x.key());
    if (it == k_inv.end()) return;
    const std::size_t c = iuf.find(it->second);
    if (!assigned.count(c)) {
      assigned[c] = x;
      tail_text[c] = text;
    }
  };
  for (const auto& [e, te] : shuttles)
    if (!done()) try_text(*te, sh(e));
  for (std::size_t g = 1; g < island_n && !done(); ++g)
    for (const auto& [e, te] : shuttles) try_text(mat_mul(island.elems[g], *te), gword(g) + " " + sh(e));
  for (const auto& [e1, t1] : shuttles)
    for (std::size_t g = 1; g < island_n && !done(); ++g)
      for (const auto& [e2, t2] : shuttles)
        try_text(mat_mul(mat_mul(*t1, island.elems[g]), *t2), sh(e1) + " " + gword(g) + " " + sh(e2));
  for (std::size_t g1 = 1; g1 < island_n && !done(); ++g1)
    for (const auto& [e1, t1] : shuttles)
      for (std::size_t g2 = 1; g2 < island_n && !done(); ++g2)
        for (const auto& [e2, t2] : shuttles)
          try_text(mat_mul(mat_mul(mat_mul(island.elems[g1], *t1), island.elems[g2]), *t2),
                   gword(g1) + " " + sh(e1) + " " + gword(g2) + " " + sh(e2));
  if (!done())
    throw Error(errc::kPostTailNotFound, std::to_string(island_classes.size() - assigned.size()) +
                                             " island class(es) in " + class_k + " admit no tail of length <= 4");

  // Assemble the package.
  GroupPackage pkg;
  pkg.name = spec.name;
  pkg.field = f;
  pkg.dim = d;
  pkg.matrices = {{"a", a}, {"b", b}, {"z", z}, {"T", t}};
  pkg.anchors = anchors;
  pkg.max_order = max_order;
  pkg.class_k = class_k;
  pkg.meta.group_order = n;
  pkg.meta.island_order = island_n;
  pkg.meta.k_class_size = class_members[uf.find(z_index)].size();
  pkg.meta.z_zT_order = order[*group.find(mat_mul(z, conj(z, t, t_inv)))];
  for (std::size_t p : probes) pkg.classes.probe_words.push_back(word_text(group.word(p)));
  pkg.classes.signatures = signatures;

  std::size_t longest = 0;
  for (std::size_t i = 0; i < island_n; ++i) {
    auto w = island.word(i);
    longest = std::max(longest, w.size());
    pkg.membership.add(fps[island_in_group[i]], to_gen_word(w));
  }
  pkg.meta.letter_bytes = std::max<std::size_t>(2 + longest, 2) + 1;

  // Post table: x1 is the class of z; the rest in island-shortlex order of
  // their representatives.
  std::vector<std::pair<std::size_t, std::size_t>> order_of_classes;  // (rep island index, class)
  for (const auto& [c, rep] : assigned) {
    const std::size_t idx = *island.find(rep);
    order_of_classes.push_back({idx == z_island ? 0 : idx + 1, c});
  }
  std::sort(order_of_classes.begin(), order_of_classes.end());
  std::size_t label = 1;
  std::vector<std::pair<std::string, std::string>> post_lines;  // (label, tail text)
  for (const auto& [rank, c] : order_of_classes) {
    const std::size_t rep_idx = rank == 0 ? z_island : rank - 1;
    std::string lab = "x" + std::to_string(label++);
    std::string mname = rep_idx == z_island ? "z" : lab;
    if (mname != "z") pkg.matrices[mname] = island.elems[rep_idx];
    pkg.post.push_back(PostEntry{lab, mname, Word()});
    post_lines.push_back({lab, tail_text[c]});
  }
  for (std::size_t i = 0; i < pkg.post.size(); ++i) pkg.post[i].tail = parse_word(post_lines[i].second, pkg);

  // Kernel data.
  if (!spec.kernel_basis.empty()) {
    KernelData kd;
    kd.exponent = spec.kernel_exponent;
    kd.probe_in = spec.probe_in;
    kd.probe_out = spec.probe_out;
    std::vector<Mat> basis = spec.kernel_basis;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const Mat& m = basis[i];
      if (!island.find(m)) throw Error(errc::kInvalidSpec, "kernel basis element is not in the island");
      if (!mat_pow(m, kd.exponent).is_identity()) throw Error(errc::kInvalidSpec, "kernel basis order does not divide exponent");
      for (std::size_t j = 0; j < i; ++j)
        if (!(mat_mul(m, basis[j]) == mat_mul(basis[j], m))) throw Error(errc::kInvalidSpec, "kernel basis does not commute");
      const std::string name = "n" + std::to_string(i + 1);
      pkg.matrices[name] = m;
      kd.basis_names.push_back(name);
    }
    Enumeration kernel = enumerate(basis, cap);
    for (const Mat& x : kernel.elems)
      for (const auto& [g, gi] : {std::pair{&a, &a_inv}, std::pair{&b, &b_inv}})
        if (!kernel.find(conj(x, *g, *gi))) throw Error(errc::kInvalidSpec, "kernel is not normal in the island");
    auto extract = [&](const Mat& m) {
      Mat q(f, kd.probe_in.size());
      for (std::size_t r = 0; r < kd.probe_in.size(); ++r)
        for (std::size_t c = 0; c < kd.probe_out.size(); ++c) q.at(r, c) = m.at(kd.probe_in[r], kd.probe_out[c]);
      return q;
    };
    for (std::size_t i = 0; i < island_n; ++i) {
      const Mat q = extract(island.elems[i]);
      for (const Mat& k : kernel.elems)
        if (!(extract(mat_mul(island.elems[i], k)) == q))
          throw Error(errc::kInvalidSpec, "quotient probe is not constant on kernel cosets");
      kd.quotient_map.emplace(extraction_key(q), to_gen_word(island.word(i)));
    }
    if (kd.quotient_map.size() * kernel.elems.size() != island_n)
      throw Error(errc::kInvalidSpec, "quotient probe does not separate kernel cosets");
    pkg.kernel = std::move(kd);
  }

  BruteForceOracle oracle;
  oracle.field = f;
  oracle.dim = d;
  for (std::size_t i = 0; i < n; ++i) oracle.add(OracleEntry{fps[i], word_text(group.word(i)), order[i], cls[i]});

  std::vector<std::string> report{
      "package: " + pkg.name,
      "group_order: " + std::to_string(n),
      "island_order: " + std::to_string(island_n),
      "class_k: " + class_k,
      "k_class_size: " + std::to_string(pkg.meta.k_class_size),
      "island_classes_in_k: " + std::to_string(island_classes.size()),
      "max_order: " + std::to_string(max_order),
      "probes: " + std::to_string(probes.size()),
      "anchor1: " + format_vec(anchors.v1),
      "anchor2: " + format_vec(anchors.v2),
      "z_zT_order: " + std::to_string(pkg.meta.z_zT_order),
  };
  return {std::move(pkg), std::move(oracle), std::move(report)};
}

}  // namespace detail

inline BuildResult build_package(const GroupSpec& spec_in) {
  GroupSpec spec = spec_in;
  std::optional<Mat> q_inv;
  if (spec.basis) {
    q_inv = mat_inverse(*spec.basis);
    spec.a = detail::change_basis(spec.a, spec.basis, q_inv);
    spec.b = detail::change_basis(spec.b, spec.basis, q_inv);
    spec.z = detail::change_basis(spec.z, spec.basis, q_inv);
    for (auto& k : spec.kernel_basis) k = detail::change_basis(k, spec.basis, q_inv);
    if (spec.shuttle) spec.shuttle = detail::change_basis(*spec.shuttle, spec.basis, q_inv);
  }
  if (spec.shuttle) return detail::build_with_shuttle(spec, *spec.shuttle, spec.max_group_order);

  const std::uint64_t cap = std::min(spec.max_group_order, *spec.group_order);
  for (const auto& img : detail::shuttle_candidates(spec.dim)) {
    const Mat t = detail::change_basis(Mat::permutation(spec.field, img), spec.basis, q_inv);
    try {
      BuildResult r = detail::build_with_shuttle(spec, t, cap);
      std::string cycle;
      for (std::size_t i = 0; i < img.size(); ++i)
        if (img[i] != i) cycle += " " + std::to_string(i + 1) + "->" + std::to_string(img[i] + 1);
      r.report.push_back("shuttle_search:" + cycle);
      return r;
    } catch (const Error& e) {
      const std::string c = e.code();
      if (c == errc::kGroupTooLarge || c == errc::kGroupOrderMismatch || c == errc::kIslandNotCentralizer ||
          c == errc::kPostTailNotFound)
        continue;
      throw;
    }
  }
  throw Error(errc::kInvalidSpec, "no shuttle candidate satisfies the package invariants");
}

// ---------------------------------------------------------------------------
// Verification: re-derive every invariant from the oracle and the engine.

inline std::vector<std::string> verify_package(const GroupPackage& pkg, const BruteForceOracle& oracle) {
  std::vector<std::string> passed;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw Error(errc::kVerificationFailure, "check failed: " + what);
    passed.push_back(what);
  };
  const Mat& a = pkg.gen_a();
  const Mat& b = pkg.gen_b();
  const Mat& z = pkg.z();
  const Mat& t = pkg.shuttle();

  require(mat_pow(t, 3).is_identity() && !t.is_identity(), "shuttle: T^3 = 1 and T != 1");
  require(mat_mul(z, z).is_identity() && !z.is_identity(), "z: involution");
  require(mat_mul(z, a) == mat_mul(a, z) && mat_mul(z, b) == mat_mul(b, z), "z: central in the island");
  require(oracle.entries.size() == pkg.meta.group_order, "oracle: size equals group order");

  // Evaluate every oracle word by plain matrix products.
  const Mat t_inv = mat_mul(t, t);
  std::vector<Mat> mats;
  mats.reserve(oracle.entries.size());
  for (const auto& e : oracle.entries) {
    std::istringstream in(e.word);
    std::string tok;
    Mat m = Mat::identity(pkg.field, pkg.dim);
    while (in >> tok) {
      if (tok == "T") {
        m = mat_mul(m, t);
      } else if (tok == "T-") {
        m = mat_mul(m, t_inv);
      } else {
        auto gw = parse_gen_chars(tok.substr(2));
        if (!gw) throw Error(errc::kVerificationFailure, "oracle: bad word '" + e.word + "'");
        m = mat_mul(m, evaluate_gen_word(*gw, a, b));
      }
    }
    mats.push_back(std::move(m));
  }
  {
    std::unordered_set<std::string> keys;
    std::unordered_set<Fingerprint> fps;
    for (const Mat& m : mats) {
      keys.insert(m.key());
      fps.insert(fingerprint_of(m, pkg.anchors));
    }
    require(keys.size() == mats.size(), "oracle: words name distinct elements");
    if (fps.size() != keys.size()) throw Error(errc::kVerificationFailure, "anchors: joint stabilizer nontrivial");
    passed.push_back("anchors: joint stabilizer is trivial");
  }
  bool keys_match = true;
  for (std::size_t i = 0; i < mats.size(); ++i) keys_match &= fingerprint_of(mats[i], pkg.anchors) == oracle.entries[i].fp;
  require(keys_match, "oracle: fingerprints match the package matrices");
  bool closed = true;
  for (const Mat& m : mats)
    for (const Mat* g : {&a, &b, &t}) closed &= oracle.find(fingerprint_of(mat_mul(m, *g), pkg.anchors)) != nullptr;
  require(closed, "group: oracle is closed under a, b, T");

  unsigned max_order = 0;
  std::uint64_t k_size = 0;
  for (const auto& e : oracle.entries) {
    max_order = std::max(max_order, e.order);
    k_size += e.cls == pkg.class_k;
  }
  require(max_order == pkg.max_order, "max_order matches the oracle");
  require(k_size == pkg.meta.k_class_size, "k_class_size matches the oracle");

  Runtime rt(pkg);
  const ActionEngine& act = rt.action();
  const IslandKit& kit = rt.kit();

  bool orders_ok = true, classes_ok = true;
  for (const auto& e : oracle.entries) {
    const Word w = parse_word(e.word, pkg);
    orders_ok &= act.order(w) == e.order;
    if (e.order == 2) {
      try {
        classes_ok &= act.class_of_involution(w) == e.cls;
      } catch (const Error&) {
        classes_ok = false;
      }
    }
  }
  require(orders_ok, "order oracle agrees with the brute-force orders");
  require(classes_ok, "class signatures agree with the brute-force classes");

  std::uint64_t island = 0;
  bool membership_ok = true;
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (!(mat_mul(mats[i], z) == mat_mul(z, mats[i]))) continue;
    ++island;
    const GenWord* gw = pkg.membership.find(oracle.entries[i].fp);
    membership_ok &= gw && fingerprint_of(evaluate_gen_word(*gw, a, b), pkg.anchors) == oracle.entries[i].fp;
    if (pkg.kernel) {
      const GenWord sw = kit.split_membership(Expr(mats[i]));
      membership_ok &= fingerprint_of(evaluate_gen_word(sw, a, b), pkg.anchors) == oracle.entries[i].fp;
    }
  }
  require(island == pkg.meta.island_order && pkg.membership.entries.size() == island,
          "island: C(z) has the declared order and the membership table covers it");
  require(membership_ok, "membership words reproduce every island element");

  bool tails_ok = true;
  for (std::size_t i = 0; i < pkg.post.size(); ++i) {
    const Word& tail = pkg.post[i].tail;
    const bool leading_island = !tail.empty() && is_island(tail.letters().front());
    tails_ok &= length(tail) <= (leading_island ? 4u : 3u);
    tails_ok &= act.fingerprint(conjugate(Expr(pkg.matrix(pkg.post[i].rep_name)), tail)) == act.fingerprint(Expr(z));
  }
  require(tails_ok, "post table: every tail conjugates its representative to z");
  bool post_ok = true;
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const auto& e = oracle.entries[i];
    if (e.order != 2 || e.cls != pkg.class_k || !kit.contains(Expr(mats[i]))) continue;
    try {
      const Word u = kit.changing_post(kit.canonical(Expr(mats[i])));
      post_ok &= length(u) <= 4;
    } catch (const Error&) {
      post_ok = false;
    }
  }
  require(post_ok, "changing post covers every island involution in class K");
  return passed;
}

}  // namespace pacisle
