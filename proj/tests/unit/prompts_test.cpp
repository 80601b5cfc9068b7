#include <gtest/gtest.h>

#include "loopinv/prompts.hpp"
#include "test_support.hpp"

using namespace loopinv;
using loopinv::testing::data_dir;
using loopinv::testing::load_named;

namespace {

SynthesisProblem fig1() { return load_named("problems/p02_fig1.sl"); }

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string user_text(const Prompt& p) {
  for (const auto& m : p.messages())
    if (m.role == MessageRole::User) return m.text;
  return {};
}

FewShotExample valid_example() {
  return {"(synth-inv inv_fun ((x Int)))\n", "(define-fun inv_fun ((x Int)) Bool (>= x 0))",
          std::nullopt, std::nullopt};
}

FewShotExample invalid_example() {
  return {"(synth-inv inv_fun ((x Int)))\n", "(define-fun inv_fun ((x Int)) Bool (= x 0))",
          Condition::Consecution, "x grows past 0"};
}

}  // namespace

TEST(Tokens, CeilingOfQuarterChars) {
  EXPECT_EQ(estimate_tokens(""), 0u);
  EXPECT_EQ(estimate_tokens("abcd"), 1u);
  EXPECT_EQ(estimate_tokens("abcde"), 2u);
  Prompt p(prompt_kind::Instruction{}, {{MessageRole::System, "abc"}, {MessageRole::User, "defgh"}});
  EXPECT_EQ(p.token_estimate(), 2u);
  p.append_text("ijklmnop");
  EXPECT_EQ(p.token_estimate(), 4u);
  EXPECT_EQ(user_text(p), "defghijklmnop");
  EXPECT_EQ(p.full_text(), "abc\ndefghijklmnop");
}

TEST(PromptObject, NeedsUserMessage) {
  EXPECT_THROW(Prompt(prompt_kind::ZeroShot{}, {{MessageRole::System, "only system"}}), Error);
}

TEST(PromptObject, KindNames) {
  EXPECT_EQ(to_string(PromptKind(prompt_kind::Partial{Condition::Consecution})),
            "partial(consecution)");
  EXPECT_EQ(to_string(PromptKind(prompt_kind::FewShot{ExampleType::Positive, 2})),
            "few-shot(positive,2)");
  EXPECT_EQ(to_string(PromptKind(prompt_kind::Integrated{ExampleType::Mixed, 3})),
            "integrated(mixed,3)");
  EXPECT_EQ(to_string(PromptKind(prompt_kind::RepairCounterexample{})), "repair-counterexample");
  EXPECT_EQ(parse_example_type("negative"), ExampleType::Negative);
  EXPECT_EQ(parse_repair_detail("counterexample"), RepairDetail::WithCounterexample);
}

TEST(PromptObject, Json) {
  auto j = to_json(build_zero_shot_prompt(fig1()));
  EXPECT_EQ(j["kind"], "zero-shot");
  EXPECT_EQ(j["messages"][0]["role"], "system");
  EXPECT_EQ(j["messages"][1]["role"], "user");
}

TEST(TokenGate, Limit) {
  Prompt p(prompt_kind::Instruction{}, {{MessageRole::User, std::string(400, 'x')}});
  EXPECT_NO_THROW(check_token_limit(p, 100));
  try {
    check_token_limit(p, 99);
    FAIL();
  } catch (const TokenLimitExceeded& e) {
    EXPECT_EQ(e.estimate(), 100u);
    EXPECT_EQ(e.limit(), 99u);
  }
}

TEST(Builders, InstructionCarriesConditionsAndProblem) {
  auto p = fig1();
  auto text = user_text(build_instruction_prompt(p));
  EXPECT_TRUE(contains(text, render_problem(p)));
  EXPECT_TRUE(contains(text, "(=> (and (inv_fun x y) (trans_fun x y x! y!)) (inv_fun x! y!))"));
  EXPECT_TRUE(contains(text, "specified variables: x, y"));
  EXPECT_TRUE(contains(text, "(define-fun inv_fun ((x Int) (y Int)) Bool <invariant>)"));
}

TEST(Builders, ZeroShotHasNoInstructions) {
  auto text = user_text(build_zero_shot_prompt(fig1()));
  EXPECT_TRUE(contains(text, render_problem(fig1())));
  EXPECT_FALSE(contains(text, "Consecution"));
}

TEST(Builders, PartialShowsOnlyItsDefinition) {
  auto p = fig1();
  const std::string pre = print_define_fun(p.pre_f), trans = print_define_fun(p.trans_f),
                    post = print_define_fun(p.post_f);
  auto init = user_text(build_partial_prompt(p, Condition::Initiation));
  EXPECT_TRUE(contains(init, pre));
  EXPECT_FALSE(contains(init, trans));
  EXPECT_FALSE(contains(init, post));
  EXPECT_FALSE(contains(init, "x!"));
  auto cons = user_text(build_partial_prompt(p, Condition::Consecution));
  EXPECT_TRUE(contains(cons, trans));
  EXPECT_TRUE(contains(cons, "(declare-var x! Int)"));
  EXPECT_FALSE(contains(cons, pre));
  EXPECT_FALSE(contains(cons, post));
}

TEST(Builders, CombineSections) {
  auto p = fig1();
  auto text = user_text(build_combine_prompt(
      p, {{Condition::Initiation, "(>= x 1)", true},
          {Condition::Initiation, "(= x 0)", false},
          {Condition::Safety, "(>= x y)", true}}));
  EXPECT_TRUE(contains(text, "Initiation attempts:\n1. PASS (>= x 1)\n2. FAIL(initiation) (= x 0)\n"));
  EXPECT_TRUE(contains(text, "Consecution attempts:\n(none)\n"));
  EXPECT_THROW(build_combine_prompt(p, {}), Error);
}

TEST(Builders, FewShotTypeChecks) {
  auto p = fig1();
  EXPECT_THROW(build_fewshot_prompt(p, {}, ExampleType::Positive), TypeMismatch);
  try {
    build_fewshot_prompt(p, {valid_example(), invalid_example()}, ExampleType::Positive);
    FAIL();
  } catch (const TypeMismatch& e) {
    EXPECT_EQ(e.index(), 1u);
  }
  EXPECT_THROW(build_fewshot_prompt(p, {valid_example()}, ExampleType::Negative), TypeMismatch);
  EXPECT_THROW(build_fewshot_prompt(p, {valid_example()}, ExampleType::Mixed), TypeMismatch);
  auto mixed = build_fewshot_prompt(p, {valid_example(), invalid_example()}, ExampleType::Mixed);
  EXPECT_EQ(to_string(mixed.kind()), "few-shot(mixed,1)");
  auto text = user_text(mixed);
  EXPECT_TRUE(contains(text, "Status: valid"));
  EXPECT_TRUE(contains(text, "Status: invalid, it violates the consecution condition\nReason: x grows past 0"));
}

TEST(Builders, SelectExamplesFromCorpus) {
  auto corpus = load_corpus(data_dir() / "corpus");
  auto ranked = top_k_examples(fig1(), corpus, 2, SimilarityMetric::Syntactic);
  auto pos = select_examples(ranked, ExampleType::Positive);
  ASSERT_EQ(pos.size(), 2u);
  for (const auto& e : pos) EXPECT_TRUE(e.valid());
  auto mixed = select_examples(ranked, ExampleType::Mixed);
  EXPECT_EQ(mixed.size(), 4u);
  auto prompt = build_integrated_prompt(fig1(), mixed, ExampleType::Mixed);
  EXPECT_EQ(to_string(prompt.kind()), "integrated(mixed,2)");
  EXPECT_TRUE(contains(user_text(prompt), "Examples of similar problems:"));
}

TEST(Builders, RepairCause) {
  auto p = fig1();
  CandidateInvariant c{parse_sexprs("(>= x y)")[0], p.inv_params, {}};
  auto text = user_text(build_repair_prompt(p, c, verdict::Violated{Condition::Consecution, {}},
                                            RepairDetail::CauseOnly));
  EXPECT_TRUE(contains(text, "(define-fun inv_fun ((x Int) (y Int)) Bool (>= x y))"));
  EXPECT_TRUE(contains(text, "Cause: the invariant does not satisfy the consecution condition."));
  EXPECT_FALSE(contains(text, "Counterexample"));
  auto ill = user_text(build_repair_prompt(p, c, verdict::IllFormed{"unknown free variable z"},
                                           RepairDetail::WithCounterexample));
  EXPECT_TRUE(contains(ill, "Details: unknown free variable z"));
  EXPECT_THROW(build_repair_prompt(p, c, verdict::Valid{}, RepairDetail::CauseOnly),
               InapplicableOutcome);
  EXPECT_THROW(build_repair_prompt(p, c, verdict::Timeout{Condition::Safety}, RepairDetail::CauseOnly),
               InapplicableOutcome);
}

TEST(Builders, RepairCounterexampleListsModel) {
  auto p = fig1();
  CandidateInvariant c{parse_sexprs("true")[0], p.inv_params, {}};
  Counterexample model{{{"x", BigInt(1)}, {"y", BigInt(1024)}, {"x!", BigInt(0)}, {"y!", BigInt(0)}}};
  auto text = user_text(build_repair_prompt(p, c, verdict::Violated{Condition::Safety, model},
                                            RepairDetail::WithCounterexample));
  EXPECT_TRUE(contains(text, "condition: (=> (inv_fun x y) (post_fun x y))\n"));
  EXPECT_TRUE(contains(text, "x = 1\n"));
  EXPECT_TRUE(contains(text, "y = 1024\n"));
}
