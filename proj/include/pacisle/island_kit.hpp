#pragma once

// Island-local oracles: arithmetic in G = C(z), constructive membership,
// conjugacy inside G by fingerprint meet-in-the-middle, changing post, and
// the quotient/kernel membership split.

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "action.hpp"
#include "package.hpp"
#include "package_io.hpp"

namespace pacisle {

struct ConjugationResult {
  IslandElem conjugator;
  bool exhaustive = false;  // true when the meet-in-the-middle budget ran out
};

class IslandKit {
 public:
  static constexpr unsigned kRandomWalkLength = 30;

  IslandKit(const GroupPackage& pkg, const ActionEngine& act) : pkg_(pkg), act_(act) {
    elements_.reserve(pkg.membership.entries.size());
    for (std::size_t i = 0; i < pkg.membership.entries.size(); ++i) {
      const auto& [fp, w] = pkg.membership.entries[i];
      IslandElem x{evaluate_gen_word(w, pkg.gen_a(), pkg.gen_b()), w};
      if (x.is_identity()) identity_index_ = i;
      elements_.push_back(std::move(x));
    }
    gens_[0] = from_gen_word({Gen::a});
    gens_[1] = from_gen_word({Gen::a_inv});
    gens_[2] = from_gen_word({Gen::b});
    gens_[3] = from_gen_word({Gen::b_inv});
    // Cayley table and inverses, indexed like the membership table.
    cayley_.resize(elements_.size() * 4);
    inverse_.resize(elements_.size());
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      for (std::size_t g = 0; g < 4; ++g)
        cayley_[4 * i + g] = index_of(mat_mul(elements_[i].matrix, gens_[g].matrix));
      inverse_[i] = index_of(mat_inverse(elements_[i].matrix));
    }
    z_ = canonical(Expr(pkg.z()));

    for (std::size_t i = 0; i < pkg.post.size(); ++i) {
      IslandElem rep = canonical(Expr(pkg.matrix(pkg.post[i].rep_name)));
      for (const Fingerprint& fp : island_class_of(rep)) rep_class_.emplace(fp, i);
      reps_.push_back(std::move(rep));
    }
    if (pkg.kernel) {
      for (const auto& n : pkg.kernel->basis_names) kernel_basis_.push_back(canonical(Expr(pkg.matrix(n))));
    }
  }

  const GroupPackage& package() const noexcept { return pkg_; }
  const ActionEngine& action() const noexcept { return act_; }
  std::size_t island_order() const noexcept { return elements_.size(); }
  const std::vector<IslandElem>& elements() const noexcept { return elements_; }
  const IslandElem& identity() const { return elements_.at(identity_index_); }
  const IslandElem& z() const noexcept { return z_; }
  const IslandElem& rep(std::size_t i) const { return reps_.at(i); }

  IslandElem island_mul(const IslandElem& x, const IslandElem& y) const { return pacisle::island_mul(x, y); }

  IslandElem from_gen_word(const GenWord& w) const {
    return IslandElem{evaluate_gen_word(w, pkg_.gen_a(), pkg_.gen_b()), w};
  }

  /// Lazy random walk of 30 steps, returned in canonical form. Each step is
  /// one of a, a^-1, b, b^-1 or a pause; without the pause, generators that
  /// are all odd would confine the walk to one parity coset.
  IslandElem island_random(Rng& rng) const { return elements_[random_index(rng)]; }

  std::size_t random_index(Rng& rng) const {
    std::size_t i = identity_index_;
    for (unsigned k = 0; k < kRandomWalkLength; ++k) {
      const auto g = uniform_below(rng, 5);
      if (g < 4) i = cayley_[4 * i + g];
    }
    return i;
  }

  /// Table lookup; the result carries the minimal generator word.
  IslandElem canonical(const Expr& x) const {
    const Fingerprint fp = act_.fingerprint(x);
    auto it = pkg_.membership.index.find(fp);
    if (it == pkg_.membership.index.end()) throw Error(errc::kNotInIsland, "element does not lie in the island");
    return elements_[it->second];
  }

  bool contains(const Expr& x) const { return pkg_.membership.index.count(act_.fingerprint(x)) != 0; }

  GenWord membership_word(const Expr& x) const {
    if (pkg_.kernel) return split_membership(x);
    const GenWord* w = pkg_.membership.find(act_.fingerprint(x));
    if (!w) throw Error(errc::kNotInIsland, "element does not lie in the island");
    return *w;
  }

  /// Membership word evaluated back into an island letter; checked against x.
  IslandElem to_island(const Expr& x) const {
    IslandElem r = from_gen_word(membership_word(x));
    if (act_.fingerprint(Expr(r.matrix)) != act_.fingerprint(x))
      throw Error(errc::kInvariantBreach, "membership word does not reproduce the element");
    return r;
  }

  /// Rows: images of the selected input coordinate vectors, restricted to the
  /// selected output coordinates.
  Mat quotient_probe_extract(const Expr& w) const {
    const KernelData& kd = require_kernel();
    const std::size_t k = kd.probe_in.size();
    Mat out(pkg_.field, k);
    for (std::size_t r = 0; r < k; ++r) {
      Vec e(pkg_.field, pkg_.dim);
      e[kd.probe_in[r]] = 1;
      const Vec img = act_.apply_word(w, std::move(e));
      for (std::size_t c = 0; c < k; ++c) out.at(r, c) = img[kd.probe_out[c]];
    }
    return out;
  }

  /// w = n*x with x read off the quotient probe and n = w*x^-1 in the normal
  /// subgroup N, solved by exhaustive search over exponent vectors.
  GenWord split_membership(const Expr& w) const {
    const KernelData& kd = require_kernel();
    auto q = kd.quotient_map.find(extraction_key(quotient_probe_extract(w)));
    if (q == kd.quotient_map.end()) throw Error(errc::kNotInIsland, "quotient probe matches no island coset");
    const IslandElem x = from_gen_word(q->second);
    const Fingerprint target = act_.fingerprint(w * Expr(mat_inverse(x.matrix)));

    const std::size_t k = kernel_basis_.size();
    const unsigned e = kd.exponent;
    double combos = std::pow(static_cast<double>(e), static_cast<double>(k));
    if (combos > 65536.0) throw Error(errc::kKernelSearchExhausted, "kernel search space exceeds 2^16");

    std::vector<unsigned> exps(k, 0);
    for (;;) {
      Mat n = Mat::identity(pkg_.field, pkg_.dim);
      for (std::size_t i = 0; i < k; ++i)
        for (unsigned j = 0; j < exps[i]; ++j) n = mat_mul(n, kernel_basis_[i].matrix);
      if (fingerprint_of(n, pkg_.anchors) == target) {
        GenWord out;
        for (std::size_t i = 0; i < k; ++i)
          for (unsigned j = 0; j < exps[i]; ++j)
            out.insert(out.end(), kernel_basis_[i].gen_word->begin(), kernel_basis_[i].gen_word->end());
        out.insert(out.end(), q->second.begin(), q->second.end());
        return out;
      }
      std::size_t i = 0;
      while (i < k && ++exps[i] == e) exps[i++] = 0;
      if (i == k) break;
    }
    throw Error(errc::kKernelSearchExhausted, "w*x^-1 is not a product of the kernel basis");
  }

  static std::size_t default_budget(std::size_t island_order) {
    const auto cap = static_cast<std::size_t>(4.0 * std::sqrt(static_cast<double>(island_order)));
    return std::min<std::size_t>(1000, cap);
  }

  /// Finds c with x^c = target: R random conjugates of each side, sorted by
  /// fingerprint and merged; x^c' = target^d' gives c = c' d'^-1. Falls back
  /// to a sweep of the whole island.
  ConjugationResult conjugate_in_island(const IslandElem& x, const IslandElem& target, Rng& rng,
                                        std::size_t budget = 0) const {
    if (budget == 0) budget = default_budget(island_order());
    if (x == target) return {identity(), false};

    struct Sample {
      Fingerprint fp;
      std::size_t idx;
      bool operator<(const Sample& o) const { return fp < o.fp || (fp == o.fp && idx < o.idx); }
    };
    auto sample_side = [&](const IslandElem& base, std::vector<std::size_t>& conjs, std::vector<Sample>& out) {
      for (std::size_t i = 0; i < budget; ++i) {
        const std::size_t c = random_index(rng);
        out.push_back({conj_fingerprint(base.matrix, c), i});
        conjs.push_back(c);
      }
      std::sort(out.begin(), out.end());
    };
    std::vector<std::size_t> cs, ds;
    std::vector<Sample> xs, ts;
    sample_side(x, cs, xs);
    sample_side(target, ds, ts);

    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ts.size()) {
      if (xs[i].fp < ts[j].fp) {
        ++i;
      } else if (ts[j].fp < xs[i].fp) {
        ++j;
      } else {
        IslandElem c = canonical(Expr(elements_[cs[xs[i].idx]]) * Expr(elements_[inverse_[ds[ts[j].idx]]]));
        if (conj_matrix(x.matrix, c.matrix) == target.matrix) return {std::move(c), false};
        throw Error(errc::kInvariantBreach, "fingerprint match did not give a conjugator");
      }
    }
    if (auto c = sweep_conjugator(x, target)) return {std::move(*c), true};
    throw Error(errc::kNotConjugate, "elements are not conjugate in the island");
  }

  /// Word u of length <= 4 with x^u = z, as c1 * tail where c1 conjugates x
  /// to its class representative. With an rng, c1 comes from the
  /// meet-in-the-middle search; without, it is the shortlex-first conjugator.
  Word changing_post(const IslandElem& x, Rng* rng = nullptr) const {
    auto it = rep_class_.find(act_.fingerprint(Expr(x.matrix)));
    if (it == rep_class_.end()) {
      const bool involution = !x.is_identity() && mat_mul(x.matrix, x.matrix).is_identity();
      if (involution && act_.class_of_involution(Expr(x.matrix)) == pkg_.class_k)
        throw Error(errc::kNotConjugate, "class-K involution matches no changing-post representative");
      throw Error(errc::kNotInClassK, "element is not an island involution in class " + pkg_.class_k);
    }
    const std::size_t i = it->second;
    IslandElem c1;
    if (rng) {
      c1 = conjugate_in_island(x, reps_[i], *rng).conjugator;
    } else {
      auto c = sweep_conjugator(x, reps_[i]);
      if (!c) throw Error(errc::kNotConjugate, "representative table is inconsistent");
      c1 = std::move(*c);
    }
    Word u = concat(Word::of(std::move(c1), pkg_.id()), pkg_.post[i].tail);
    if (length(u) > 4) throw Error(errc::kInvariantBreach, "changing-post word longer than 4");
    if (act_.fingerprint(conjugate(Expr(x.matrix), u)) != act_.fingerprint(Expr(pkg_.z())))
      throw Error(errc::kInvariantBreach, "changing-post word does not conjugate to z");
    return u;
  }

  Word changing_post(const Expr& x, Rng* rng = nullptr) const { return changing_post(canonical(x), rng); }

  /// Alternating word of exactly `len` letters, island letters non-trivial.
  Word random_word(std::size_t len, Rng& rng) const {
    std::vector<Letter> ls;
    bool island = uniform_below(rng, 2) == 0;
    for (std::size_t i = 0; i < len; ++i, island = !island) {
      if (island) {
        std::size_t idx;
        do idx = uniform_below(rng, elements_.size());
        while (idx == identity_index_);
        ls.emplace_back(elements_[idx]);
      } else {
        ls.emplace_back(Shuttle{static_cast<std::uint8_t>(1 + uniform_below(rng, 2))});
      }
    }
    return reduce(Word(std::move(ls), pkg_.id()));
  }

 private:
  const KernelData& require_kernel() const {
    if (!pkg_.kernel) throw Error(errc::kUsage, "package has no kernel data");
    return *pkg_.kernel;
  }

  static Mat conj_matrix(const Mat& x, const Mat& c) { return mat_mul(mat_mul(mat_inverse(c), x), c); }

  std::size_t index_of(const Mat& m) const {
    auto it = pkg_.membership.index.find(fingerprint_of(m, pkg_.anchors));
    if (it == pkg_.membership.index.end()) throw Error(errc::kNotInIsland, "island table is not closed");
    return it->second;
  }

  // Fingerprint of x^c for the c-th island element, by acting on the anchors.
  Fingerprint conj_fingerprint(const Mat& x, std::size_t c) const {
    const Mat& ci = elements_[inverse_[c]].matrix;
    const Mat& cm = elements_[c].matrix;
    auto img = [&](const Vec& v) { return vec_apply(vec_apply(vec_apply(v, ci), x), cm); };
    return fingerprint_from_images(img(pkg_.anchors.v1), img(pkg_.anchors.v2));
  }

  std::optional<IslandElem> sweep_conjugator(const IslandElem& x, const IslandElem& target) const {
    const Fingerprint want = fingerprint_of(target.matrix, pkg_.anchors);
    for (std::size_t i = 0; i < elements_.size(); ++i)
      if (conj_fingerprint(x.matrix, i) == want) return elements_[i];
    return std::nullopt;
  }

  // Island conjugacy class, as fingerprints, by closing under a and b.
  std::vector<Fingerprint> island_class_of(const IslandElem& x) const {
    std::vector<Fingerprint> out;
    std::unordered_map<Fingerprint, bool> seen;
    std::deque<Mat> queue{x.matrix};
    seen[fingerprint_of(x.matrix, pkg_.anchors)] = true;
    while (!queue.empty()) {
      Mat m = std::move(queue.front());
      queue.pop_front();
      out.push_back(fingerprint_of(m, pkg_.anchors));
      for (std::size_t g : {std::size_t{0}, std::size_t{2}}) {
        Mat y = conj_matrix(m, gens_[g].matrix);
        if (seen.emplace(fingerprint_of(y, pkg_.anchors), true).second) queue.push_back(std::move(y));
      }
    }
    return out;
  }

  const GroupPackage& pkg_;
  const ActionEngine& act_;
  std::vector<IslandElem> elements_;
  std::size_t identity_index_ = 0;
  IslandElem gens_[4];
  std::vector<std::size_t> cayley_;
  std::vector<std::size_t> inverse_;
  IslandElem z_;
  std::vector<IslandElem> reps_;
  std::unordered_map<Fingerprint, std::size_t> rep_class_;
  std::vector<IslandElem> kernel_basis_;
};

}  // namespace pacisle
