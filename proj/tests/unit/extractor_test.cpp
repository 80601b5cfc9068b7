#include <algorithm>

#include <gtest/gtest.h>

#include "loopinv/extractor.hpp"
#include "test_support.hpp"

using namespace loopinv;
using loopinv::testing::load_named;

namespace {

SynthesisProblem fig1() { return load_named("problems/p02_fig1.sl"); }

bool has_fix(const std::vector<Fix>& fixes, const Fix& f) {
  return std::find(fixes.begin(), fixes.end(), f) != fixes.end();
}

const Fix kCode{FixKind::StrippedKeyword, "code"};
const Fix kFence{FixKind::StrippedFence, {}};
const Fix kBalanced{FixKind::BalancedParens, {}};
const Fix kReparam{FixKind::ReparamedSignature, {}};

}  // namespace

TEST(FixNames, RoundTrip) {
  for (const Fix& f : {kCode, kFence, kBalanced, kReparam, Fix{FixKind::RenamedFunction, "inv"}})
    EXPECT_EQ(parse_fix(to_string(f)), f) << to_string(f);
  EXPECT_EQ(to_string(kCode), "StrippedKeyword(code)");
  EXPECT_FALSE(parse_fix("Nonsense"));
}

TEST(Sanitize, StripsFenceAndHint) {
  auto r = sanitize("Here you go:\n```smt2\n(>= x y)\n```\nDone.");
  EXPECT_EQ(r.text, "(>= x y)\n");
  EXPECT_EQ(r.fixes, std::vector<Fix>{kFence});
}

TEST(Sanitize, PicksFirstFenceWithExpression) {
  auto r = sanitize("```\nnothing here\n```\n```lisp\n(= x 1)\n```");
  EXPECT_EQ(r.text, "(= x 1)\n");
}

TEST(Sanitize, KeywordsOnlyBeforeExpressions) {
  EXPECT_EQ(sanitize("code (>= x 0)").text, "(>= x 0)");
  EXPECT_EQ(sanitize("lisp Bool (>= x 0)").text, "Bool (>= x 0)");
  EXPECT_EQ(sanitize("scheme code (>= x 0)").fixes.size(), 2u);
  // Ordinary prose is left alone.
  EXPECT_EQ(sanitize("the code is fine").text, "the code is fine");
  EXPECT_TRUE(sanitize("code Bool (and a b)", SanitizeOptions{{}}).fixes.empty());
}

TEST(Sanitize, BalancesAfterStripping) {
  auto r = sanitize("code (and (>= x 0) (>= y 0)");
  EXPECT_EQ(r.text, "(and (>= x 0) (>= y 0))");
  EXPECT_EQ(r.fixes, (std::vector<Fix>{kCode, kBalanced}));
  EXPECT_THROW(sanitize("(a)) (b"), UnrepairableError);
}

TEST(Extract, FullDefineFun) {
  auto r = extract_invariant("(define-fun inv_fun ((x Int) (y Int)) Bool (>= x y))", fig1());
  ASSERT_TRUE(r.candidate) << r.failure->message();
  EXPECT_EQ(print_sexpr(r.candidate->body), "(>= x y)");
  EXPECT_TRUE(r.applied_fixes.empty());
}

TEST(Extract, RenamedFunction) {
  auto r = extract_invariant("(define-fun inv ((x Int) (y Int)) Bool (>= x y))", fig1());
  ASSERT_TRUE(r.candidate);
  EXPECT_TRUE(has_fix(r.applied_fixes, Fix{FixKind::RenamedFunction, "inv"}));
}

TEST(Extract, BareBodyGetsProblemSignature) {
  auto r = extract_invariant("The invariant is (and (>= x 1) (>= y 0))", fig1());
  ASSERT_TRUE(r.candidate);
  EXPECT_EQ(r.candidate->params, fig1().inv_params);
  EXPECT_TRUE(has_fix(r.applied_fixes, kReparam));
}

TEST(Extract, SkipsNonBooleanParentheticals) {
  auto r = extract_invariant("Note (in passing) that x grows.\nAnswer: (<= y x)", fig1());
  ASSERT_TRUE(r.candidate);
  EXPECT_EQ(print_sexpr(r.candidate->body), "(<= y x)");
}

TEST(Extract, BooleanLiterals) {
  auto r = extract_invariant("true", fig1());
  ASSERT_TRUE(r.candidate);
  EXPECT_EQ(r.candidate->body, SExpr::boolean(true));
}

TEST(Extract, NothingFound) {
  auto r = extract_invariant("I cannot determine an invariant.", fig1());
  ASSERT_TRUE(r.failure);
  EXPECT_EQ(r.failure->kind, ExtractionFailure::Kind::NoInvariantFound);
  EXPECT_FALSE(r.located);
}

TEST(Extract, UnrepairableParens) {
  auto r = extract_invariant("(>= x y)) and (", fig1());
  ASSERT_TRUE(r.failure);
  EXPECT_EQ(r.failure->kind, ExtractionFailure::Kind::Unrepairable);
}

TEST(Extract, ParamMismatch) {
  auto r = extract_invariant("(define-fun inv_fun ((a Int) (b Int)) Bool (>= a b))", fig1());
  ASSERT_TRUE(r.failure);
  EXPECT_EQ(r.failure->kind, ExtractionFailure::Kind::ParamMismatch);
  ASSERT_TRUE(r.located);
}

TEST(Extract, UnknownFreeVariableKeepsLocated) {
  auto r = extract_invariant("(and (>= x y) (>= z 0))", fig1());
  ASSERT_TRUE(r.failure);
  EXPECT_EQ(r.failure->kind, ExtractionFailure::Kind::UnknownFreeVariable);
  EXPECT_EQ(r.failure->detail, "z");
  EXPECT_EQ(r.failure->message(), "unknown free variable z");
  ASSERT_TRUE(r.located);
  EXPECT_EQ(print_sexpr(r.located->body), "(and (>= x y) (>= z 0))");
}

TEST(Extract, UnstrippedKeywordIsExpressionError) {
  auto r = extract_invariant("code Bool (>= x y)", fig1(), SanitizeOptions{{}});
  ASSERT_TRUE(r.failure);
  EXPECT_EQ(r.failure->kind, ExtractionFailure::Kind::ExpressionError);
  auto fixed = extract_invariant("code Bool (>= x y)", fig1());
  ASSERT_TRUE(fixed.candidate);
  EXPECT_TRUE(has_fix(fixed.applied_fixes, kCode));
}

TEST(Extract, ListingTranscriptions) {
  auto l1 = extract_invariant(loopinv::testing::slurp(loopinv::testing::data_dir() / "listings/listing1.txt"),
                              load_named("listings/listing1.sl"));
  ASSERT_TRUE(l1.candidate);
  EXPECT_TRUE(has_fix(l1.applied_fixes, kCode));
  EXPECT_TRUE(has_fix(l1.applied_fixes, kReparam));

  auto l2r = extract_invariant(
      loopinv::testing::slurp(loopinv::testing::data_dir() / "listings/listing2_repaired.txt"),
      load_named("listings/listing2.sl"));
  ASSERT_TRUE(l2r.failure);
  EXPECT_TRUE(has_fix(l2r.applied_fixes, kBalanced));
  EXPECT_EQ(l2r.failure->kind, ExtractionFailure::Kind::UnknownFreeVariable);
}

TEST(Normalize, CandidateRecheck) {
  auto p = fig1();
  CandidateInvariant c{parse_sexprs("(>= x y)")[0], p.inv_params, {}};
  EXPECT_NO_THROW(normalize_signature(c, p));
  c.params.pop_back();
  try {
    normalize_signature(c, p);
    FAIL();
  } catch (const NormalizationError& e) {
    EXPECT_EQ(e.kind(), NormalizationError::Kind::ParamMismatch);
  }
}
