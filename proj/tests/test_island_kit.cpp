#include <gtest/gtest.h>

#include <deque>
#include <set>

#include "support.hpp"

using namespace pacisle;
using support::ref;

namespace {

const support::Ref& RA() { return ref("ref_a"); }

IslandElem perm_elem(const support::Ref& r, const std::string& cyc) {
  return IslandElem{Mat::permutation(r.pkg().field, support::cycles(r.pkg().dim, cyc)), std::nullopt};
}

support::Perm perm(const IslandElem& x) { return support::perm_of(x.matrix); }

// Word distances from the identity over a, a^-1, b, b^-1, by BFS on permutations.
std::map<support::Perm, std::size_t> word_distances(const GroupPackage& pkg) {
  const support::Perm a = support::perm_of(pkg.gen_a()), b = support::perm_of(pkg.gen_b());
  const support::Perm gens[4] = {a, support::inverse(a), b, support::inverse(b)};
  std::map<support::Perm, std::size_t> dist{{support::identity_perm(pkg.dim), 0}};
  std::deque<support::Perm> queue{support::identity_perm(pkg.dim)};
  while (!queue.empty()) {
    const support::Perm p = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      const support::Perm q = support::compose(p, g);
      if (dist.emplace(q, dist[p] + 1).second) queue.push_back(q);
    }
  }
  return dist;
}

}  // namespace

TEST(IslandMul, Examples) {
  const auto& kit = RA().kit();
  const IslandElem a = kit.from_gen_word({Gen::a}), b = kit.from_gen_word({Gen::b});
  EXPECT_EQ(kit.island_mul(a, kit.identity()), a);
  EXPECT_TRUE(kit.island_mul(a, a).is_identity());
  EXPECT_EQ(perm(kit.island_mul(b, b)), support::cycles(4, "(1,2)(3,4)"));
  EXPECT_EQ(kit.island_mul(b, b), kit.z());
}

TEST(IslandRandom, FullSupportAndDeterminism) {
  const auto& kit = RA().kit();
  Rng rng(1);
  std::set<support::Perm> seen;
  for (int i = 0; i < 10000; ++i) {
    const IslandElem x = kit.island_random(rng);
    EXPECT_TRUE(kit.contains(x));
    seen.insert(perm(x));
  }
  EXPECT_EQ(seen.size(), 8u);
  Rng r1(99), r2(99);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(kit.island_random(r1), kit.island_random(r2));
}

TEST(IslandRandom, RefBCoversIsland) {
  const auto& kit = ref("ref_b").kit();
  Rng rng(2);
  std::set<std::string> seen;
  for (int i = 0; i < 20000; ++i) seen.insert(kit.island_random(rng).matrix.key());
  EXPECT_EQ(seen.size(), 384u);
}

TEST(MembershipWord, Examples) {
  const auto& kit = RA().kit();
  EXPECT_TRUE(kit.membership_word(Word()).empty());
  EXPECT_EQ(gen_word_chars(kit.membership_word(kit.from_gen_word({Gen::a}))), "a");
  EXPECT_EQ(gen_word_tokens(kit.membership_word(Expr(RA().pkg().z()))), "b b");
  try {
    kit.membership_word(parse_word("T", RA().pkg()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kNotInIsland);
  }
}

TEST(MembershipWord, MinimalAndCorrect) {
  for (const char* name : {"ref_a", "ref_b"}) {
    const auto& r = ref(name);
    const auto dist = word_distances(r.pkg());
    EXPECT_EQ(dist.size(), r.pkg().meta.island_order);
    for (const auto& [p, d] : dist) {
      const Mat m = Mat::permutation(r.pkg().field, p);
      const GenWord w = r.kit().membership_word(Expr(m));
      EXPECT_EQ(w.size(), d);
      EXPECT_EQ(evaluate_gen_word(w, r.pkg().gen_a(), r.pkg().gen_b()), m);
    }
  }
}

TEST(SplitMembership, KernelElementsUseIdentityCoset) {
  const auto& r = ref("ref_c");
  const auto& kd = *r.pkg().kernel;
  for (const auto& name : kd.basis_names) {
    const Mat n = r.pkg().matrix(name);
    const Mat q = r.kit().quotient_probe_extract(Expr(n));
    EXPECT_EQ(q, r.kit().quotient_probe_extract(Word()));
    const GenWord w = r.kit().split_membership(Expr(n));
    EXPECT_EQ(fingerprint_of(evaluate_gen_word(w, r.pkg().gen_a(), r.pkg().gen_b()), r.pkg().anchors),
              fingerprint_of(n, r.pkg().anchors));
  }
}

TEST(SplitMembership, LongAmbientWordRoundTrip) {
  const auto& r = ref("ref_c");
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const IslandElem x = r.kit().island_random(rng);
    const Word c = r.kit().random_word(12, rng);
    // c^-1 (c x c^-1) c, left unexpanded: an ambient expression for x.
    const Expr disguised = Expr(invert(c)) * Expr(c) * Expr(x) * Expr(invert(c)) * Expr(c);
    const GenWord w = r.kit().split_membership(disguised);
    EXPECT_EQ(evaluate_gen_word(w, r.pkg().gen_a(), r.pkg().gen_b()), x.matrix);
  }
}

TEST(SplitMembership, AgreesWithTableExhaustively) {
  const auto& r = ref("ref_c");
  for (const auto& [fp, w] : r.pkg().membership.entries) {
    const Mat m = evaluate_gen_word(w, r.pkg().gen_a(), r.pkg().gen_b());
    const GenWord s = r.kit().split_membership(Expr(m));
    EXPECT_EQ(evaluate_gen_word(s, r.pkg().gen_a(), r.pkg().gen_b()), m);
  }
}

TEST(SplitMembership, RequiresKernelData) {
  try {
    RA().kit().split_membership(Word());
    FAIL();
  } catch (const Error&) {
  }
}

TEST(QuotientProbe, IdentityAndCosetConstancy) {
  const auto& r = ref("ref_c");
  const auto& kd = *r.pkg().kernel;
  const Mat id = r.kit().quotient_probe_extract(Word());
  for (std::size_t i = 0; i < kd.probe_in.size(); ++i)
    for (std::size_t j = 0; j < kd.probe_out.size(); ++j)
      EXPECT_EQ(id.at(i, j), kd.probe_in[i] == kd.probe_out[j] ? 1 : 0);

  // All of N, from the basis.
  std::vector<Mat> kernel{Mat::identity(r.pkg().field, r.pkg().dim)};
  for (const auto& name : kd.basis_names) {
    const Mat n = r.pkg().matrix(name);
    const std::size_t sz = kernel.size();
    for (std::size_t i = 0; i < sz; ++i) kernel.push_back(mat_mul(kernel[i], n));
  }
  EXPECT_EQ(kernel.size(), 16u);

  std::map<std::string, std::set<std::string>> cosets_by_probe;
  for (const IslandElem& x : r.kit().elements()) {
    const Mat q = r.kit().quotient_probe_extract(Expr(x));
    for (const Mat& n : kernel) EXPECT_EQ(r.kit().quotient_probe_extract(Expr(mat_mul(x.matrix, n))), q);
    // coset of x, named by its smallest member key
    std::string coset_name = x.matrix.key();
    for (const Mat& n : kernel) coset_name = std::min(coset_name, mat_mul(n, x.matrix).key());
    cosets_by_probe[extraction_key(q)].insert(coset_name);
  }
  EXPECT_EQ(cosets_by_probe.size(), 24u);
  for (const auto& [key, cosets] : cosets_by_probe) EXPECT_EQ(cosets.size(), 1u);
}

TEST(ConjugateInIsland, Examples) {
  const auto& r = RA();
  Rng rng(3);
  const IslandElem x = r.kit().canonical(Expr(perm_elem(r, "(1,4)(2,3)")));
  const IslandElem t = r.kit().canonical(Expr(perm_elem(r, "(1,3)(2,4)")));
  EXPECT_TRUE(r.kit().conjugate_in_island(x, x, rng).conjugator.is_identity());
  const IslandElem c = r.kit().conjugate_in_island(x, t, rng).conjugator;
  EXPECT_EQ(support::compose(support::compose(support::inverse(perm(c)), perm(x)), perm(c)), perm(t));
  try {
    r.kit().conjugate_in_island(r.kit().z(), r.kit().from_gen_word({Gen::a}), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kNotConjugate);
  }
}

TEST(ConjugateInIsland, RandomPairsOnRefB) {
  const auto& r = ref("ref_b");
  Rng rng(8);
  EXPECT_EQ(IslandKit::default_budget(384), 78u);
  EXPECT_EQ(IslandKit::default_budget(1u << 20), 1000u);
  for (int i = 0; i < 100; ++i) {
    const IslandElem x = r.kit().island_random(rng), c = r.kit().island_random(rng);
    const IslandElem t = r.kit().canonical(Expr(mat_inverse(c.matrix)) * Expr(x) * Expr(c));
    const IslandElem found = r.kit().conjugate_in_island(x, t, rng).conjugator;
    EXPECT_EQ(mat_mul(mat_mul(mat_inverse(found.matrix), x.matrix), found.matrix), t.matrix);
  }
}

TEST(ChangingPost, Examples) {
  const auto& r = RA();
  EXPECT_TRUE(r.kit().changing_post(r.kit().z()).empty());
  EXPECT_EQ(format_word(r.kit().changing_post(perm_elem(r, "(1,3)(2,4)")), r.pkg()), "T-");
  const Word u = r.kit().changing_post(r.kit().canonical(Expr(perm_elem(r, "(1,4)(2,3)"))));
  EXPECT_EQ(length(u), 2u);
  EXPECT_EQ(format_word(u, r.pkg()), "g:a T-");
}

TEST(ChangingPost, ConjugatesToZ) {
  for (const char* name : {"ref_a", "ref_b", "ref_c"}) {
    const auto& r = ref(name);
    Rng rng(10);
    for (const IslandElem& x : r.kit().elements()) {
      if (x.is_identity() || !mat_mul(x.matrix, x.matrix).is_identity()) continue;
      if (r.act().class_of_involution(Expr(x)) != r.pkg().class_k) {
        EXPECT_THROW(r.kit().changing_post(x), Error);
        continue;
      }
      for (Rng* g : {static_cast<Rng*>(nullptr), &rng}) {
        const Word u = r.kit().changing_post(x, g);
        EXPECT_LE(length(u), 4u);
        const Mat um = support::plain_product(u, r.pkg());
        EXPECT_EQ(mat_mul(mat_mul(mat_inverse(um), x.matrix), um), r.pkg().z()) << name;
      }
    }
  }
}

TEST(ChangingPost, RejectsElementsOutsideK) {
  const auto& r = RA();
  try {
    r.kit().changing_post(r.kit().from_gen_word({Gen::a}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kNotInClassK);
  }
  try {
    r.kit().changing_post(Expr(parse_word("T", r.pkg())));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kNotInIsland);
  }
}

TEST(RandomWord, AlternatesAndHasExactLength) {
  const auto& r = ref("ref_b");
  Rng rng(4);
  for (std::size_t len : {1u, 2u, 17u, 60u}) {
    const Word w = r.kit().random_word(len, rng);
    EXPECT_EQ(length(w), len);
  }
}
