#include <gtest/gtest.h>

#include "support.hpp"

using namespace pacisle;
using support::ref;

namespace {

const support::Ref& RA() { return ref("ref_a"); }
Word W(const std::string& text) { return parse_word(text, RA().pkg()); }
Word inline_perm(const std::string& cyc) {
  const Mat m = Mat::permutation(RA().pkg().field, support::cycles(4, cyc));
  return Word::of(IslandElem{m, std::nullopt}, RA().pkg().id());
}

// Every REF-A element, as parsed oracle words.
std::vector<Word> all_elements(const support::Ref& r) {
  std::vector<Word> out;
  for (const auto& e : r.oracle().entries) out.push_back(parse_word(e.word, r.pkg()));
  return out;
}

}  // namespace

TEST(ApplyWord, Examples) {
  const auto& act = RA().act();
  const Vec v(FieldSpec(3), {0, 1, 2, 0});
  EXPECT_EQ(act.apply_word(Word(), v), v);
  EXPECT_EQ(act.apply_word(W("g:a"), v), Vec(FieldSpec(3), {1, 0, 2, 0}));
  EXPECT_EQ(act.apply_word(Word({Shuttle{1}, Shuttle{1}, Shuttle{1}}, RA().pkg().id()), v), v);
  EXPECT_THROW(act.apply_word(Word(), Vec(FieldSpec(3), {0, 1})), Error);
}

TEST(IsIdentity, Examples) {
  const auto& act = RA().act();
  EXPECT_TRUE(act.is_identity(Word()));
  EXPECT_TRUE(act.is_identity(Expr(W("g:z")) * Expr(W("g:z"))));
  EXPECT_FALSE(act.is_identity(W("g:a")));
}

TEST(IsIdentity, ExhaustiveAgainstMatrices) {
  const auto& r = RA();
  for (const Word& w : all_elements(r)) {
    EXPECT_EQ(r.act().is_identity(w), support::plain_product(w, r.pkg()).is_identity());
    // a word times the inverse of a different element is never the identity
    for (const Word& u : all_elements(r))
      EXPECT_EQ(r.act().is_identity(concat(w, invert(u))), support::eval_perm(w, r.pkg()) == support::eval_perm(u, r.pkg()));
  }
}

TEST(IsIdentityMc, NeverFalseForIdentity) {
  const auto& act = RA().act();
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_TRUE(act.is_identity_mc(Word(), rng));
    EXPECT_TRUE(act.is_identity_mc(concat(W("g:a T g:b"), invert(W("g:a T g:b"))), rng));
  }
}

TEST(Order, Examples) {
  const auto& act = RA().act();
  EXPECT_EQ(act.order(W("T")), 3u);
  EXPECT_EQ(act.order(W("g:a")), 2u);
  EXPECT_EQ(act.order(W("g:a T")), 4u);
  EXPECT_EQ(act.order(Word()), 1u);
}

TEST(Order, MatchesCycleTypeExhaustively) {
  const auto& r = RA();
  for (const Word& w : all_elements(r)) EXPECT_EQ(r.act().order(w), support::perm_order(support::eval_perm(w, r.pkg())));
}

TEST(Order, ConjugationInvariant) {
  const auto& r = ref("ref_b");
  Rng rng(21);
  for (int i = 0; i < 100; ++i) {
    const Word w = r.kit().random_word(10, rng), c = r.kit().random_word(7, rng);
    EXPECT_EQ(r.act().order(concat({invert(c), w, c})), r.act().order(w));
  }
}

TEST(Order, OverflowPastMaxOrder) {
  GroupPackage pkg = RA().pkg();
  pkg.max_order = 2;
  ActionEngine act(pkg);
  try {
    act.order(parse_word("T", pkg));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kOrderOverflow);
  }
}

TEST(PowerToInvolution, Examples) {
  const auto& act = RA().act();
  auto z = act.power_to_involution(W("g:z"));
  ASSERT_TRUE(z);
  EXPECT_EQ(z->exponent, 1u);
  EXPECT_FALSE(act.power_to_involution(W("T")));
  auto t = act.power_to_involution(W("g:a T"));
  ASSERT_TRUE(t);
  EXPECT_EQ(support::perm_of(act.to_matrix(*t)), support::cycles(4, "(1,4)(2,3)"));
}

TEST(PowerToInvolution, ResultIsInvolution) {
  const auto& r = ref("ref_b");
  Rng rng(4);
  int found = 0;
  for (int i = 0; i < 200; ++i) {
    const Word w = r.kit().random_word(9, rng);
    if (auto t = r.act().power_to_involution(w)) {
      ++found;
      EXPECT_TRUE(r.act().is_identity(Expr(*t) * Expr(*t)));
      EXPECT_FALSE(r.act().is_identity(*t));
    }
  }
  EXPECT_GT(found, 50);
}

TEST(DihedralEvenPower, Examples) {
  const auto& act = RA().act();
  const Word u = concat(inline_perm("(1,4)(2,3)"), W("g:z"));
  auto y = act.dihedral_even_power(u);
  ASSERT_TRUE(y);
  EXPECT_EQ(y->exponent, 1u);
  EXPECT_EQ(support::perm_of(act.to_matrix(*y)), support::cycles(4, "(1,3)(2,4)"));
  EXPECT_FALSE(act.dihedral_even_power(W("T")));
  EXPECT_FALSE(act.dihedral_even_power(Word()));
}

TEST(DihedralEvenPower, CommutesWithBothInvolutions) {
  const auto& r = ref("ref_b");
  const Mat z = r.pkg().z();
  Rng rng(17);
  int checked = 0;
  for (int i = 0; i < 300 && checked < 60; ++i) {
    auto t = r.act().power_to_involution(r.kit().random_word(11, rng));
    if (!t) continue;
    const Mat tm = r.act().to_matrix(*t);
    auto y = r.act().dihedral_even_power(Expr(tm) * Expr(z));
    if (!y) continue;
    const Mat ym = r.act().to_matrix(*y);
    EXPECT_EQ(mat_mul(ym, z), mat_mul(z, ym));
    EXPECT_EQ(mat_mul(ym, tm), mat_mul(tm, ym));
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(ClassOfInvolution, Examples) {
  const auto& act = RA().act();
  const std::string k = RA().pkg().class_k;
  EXPECT_EQ(act.class_of_involution(W("g:z")), k);
  EXPECT_NE(act.class_of_involution(W("g:a")), k);
  EXPECT_EQ(act.class_of_involution(inline_perm("(1,3)(2,4)")), k);
}

TEST(ClassOfInvolution, MatchesCycleTypeOnRefB) {
  // In S8, involution classes are determined by the number of transpositions.
  const auto& r = ref("ref_b");
  std::map<std::vector<unsigned>, std::string> label_of_type;
  for (const auto& e : r.oracle().entries) {
    if (e.order != 2) continue;
    const Word w = parse_word(e.word, r.pkg());
    const auto type = support::cycle_type(support::eval_perm(w, r.pkg()));
    const std::string label = r.act().class_of_involution(w);
    EXPECT_EQ(label, e.cls);
    auto [it, fresh] = label_of_type.emplace(type, label);
    EXPECT_EQ(it->second, label);
  }
  EXPECT_EQ(label_of_type.size(), 4u);
  EXPECT_EQ(label_of_type.at({2, 2, 2, 2}), r.pkg().class_k);
}

TEST(ClassOfInvolution, ConstantOnConjugates) {
  const auto& r = RA();
  Rng rng(3);
  for (const Word& t : all_elements(r)) {
    if (r.act().order(t) != 2) continue;
    const std::string label = r.act().class_of_involution(t);
    for (int i = 0; i < 20; ++i) {
      const Word c = r.kit().random_word(5, rng);
      EXPECT_EQ(r.act().class_of_involution(concat({invert(c), t, c})), label);
    }
  }
}

TEST(ClassOfInvolution, UnknownSignatureThrows) {
  try {
    RA().act().class_of_signature(ClassSignature{1, {7}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kUnknownSignature);
  }
}

TEST(ToMatrix, Examples) {
  const auto& act = RA().act();
  EXPECT_TRUE(act.to_matrix(Word()).is_identity());
  EXPECT_EQ(act.to_matrix(W("g:a")), RA().pkg().gen_a());
  Rng rng(30);
  for (int i = 0; i < 50; ++i) {
    const Word u = RA().kit().random_word(7, rng), v = RA().kit().random_word(5, rng);
    EXPECT_EQ(act.to_matrix(concat(u, v)), mat_mul(act.to_matrix(u), act.to_matrix(v)));
  }
}

TEST(TraceOfWord, Examples) {
  const auto& act = RA().act();
  EXPECT_EQ(act.trace_of_word(Word()), 1);
  EXPECT_EQ(act.trace_of_word(W("g:z")), 0);
  Rng rng(31);
  for (int i = 0; i < 50; ++i) {
    const Word w = RA().kit().random_word(6, rng), c = RA().kit().random_word(4, rng);
    EXPECT_EQ(act.trace_of_word(concat({invert(c), w, c})), act.trace_of_word(w));
  }
}
