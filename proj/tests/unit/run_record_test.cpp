#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "loopinv/run_record.hpp"

using namespace loopinv;

namespace {

RunRecord repair_record() {
  RunRecord r;
  r.id = "p/instruction/0/repair-cause/2";
  r.problem_id = "p";
  r.strategy = "repair-cause";
  r.phase = Phase::Repair;
  r.sample_index = 0;
  r.response_id = "abcdef#0";
  r.response = "some text\nwith lines";
  r.invariant = "(define-fun inv_fun ((x Int)) Bool (>= x 0))";
  r.extraction = {true, {"StrippedKeyword(code)"}, std::nullopt};
  r.outcome = {OutcomeKind::Violated, Condition::Safety,
               Counterexample{{{"x", BigInt("-123456789012345678901234567890")}, {"b", true}}}, {}};
  r.lineage_id = "p/instruction/0";
  r.parent_id = "p/instruction/0/repair-cause/1";
  r.attempt = 2;
  r.elapsed_ms = 1.5;
  return r;
}

}  // namespace

TEST(RunRecord, JsonRoundTrip) {
  auto r = repair_record();
  auto j = to_json(r);
  EXPECT_EQ(j["phase"], "repair");
  EXPECT_EQ(j["outcome"]["kind"], "violated");
  EXPECT_EQ(j["outcome"]["condition"], "safety");
  EXPECT_EQ(j["outcome"]["model"]["x"], "-123456789012345678901234567890");
  EXPECT_EQ(j["lineage"], "p/instruction/0");
  EXPECT_EQ(run_record_from_json(j), r);

  RunRecord cond;
  cond.id = "p/partial/initiation/3";
  cond.phase = Phase::Conditional;
  cond.target_condition = Condition::Initiation;
  cond.outcome.kind = OutcomeKind::Holds;
  cond.extraction.failure = "nothing";
  auto jc = to_json(cond);
  EXPECT_FALSE(jc.contains("lineage"));
  EXPECT_EQ(jc["target_condition"], "initiation");
  EXPECT_EQ(run_record_from_json(jc), cond);
}

TEST(RunRecord, Names) {
  for (auto k : {OutcomeKind::Valid, OutcomeKind::Violated, OutcomeKind::Holds, OutcomeKind::IllFormed,
                 OutcomeKind::Timeout, OutcomeKind::SolverFailure, OutcomeKind::TokenLimit,
                 OutcomeKind::RequestFailed, OutcomeKind::CycleDetected, OutcomeKind::ExtractorFixed})
    EXPECT_EQ(parse_outcome_kind(to_string(k)), k);
  EXPECT_EQ(to_string(OutcomeKind::ExtractorFixed), "extractor_fixed");
  EXPECT_EQ(parse_phase("final"), Phase::Final);
  EXPECT_FALSE(parse_phase("bogus"));
}

TEST(RunRecord, OutcomeConversions) {
  Counterexample m{{{"x", BigInt(3)}}};
  auto o = to_record_outcome(VerificationOutcome(verdict::Violated{Condition::Consecution, m}));
  EXPECT_EQ(o.kind, OutcomeKind::Violated);
  EXPECT_EQ(o.condition, Condition::Consecution);
  EXPECT_EQ(o.model, m);
  auto back = to_verification_outcome(o);
  ASSERT_TRUE(back);
  EXPECT_EQ(std::get<verdict::Violated>(*back).model, m);

  EXPECT_EQ(to_record_outcome(ConditionVerdict(verdict::Holds{})).kind, OutcomeKind::Holds);
  EXPECT_EQ(to_record_outcome(VerificationOutcome(verdict::IllFormed{"bad"})).detail, "bad");
  EXPECT_EQ(to_record_outcome(VerificationOutcome(verdict::Timeout{Condition::Safety})).condition,
            Condition::Safety);
  EXPECT_FALSE(to_verification_outcome({OutcomeKind::TokenLimit, {}, {}, {}}));
  EXPECT_FALSE(to_verification_outcome({OutcomeKind::CycleDetected, {}, {}, {}}));
}

TEST(RunLog, WriteReadAndAppend) {
  auto path = std::filesystem::temp_directory_path() / "loopinv_run_record_test.jsonl";
  std::filesystem::remove(path);
  EXPECT_TRUE(read_run_log(path).empty());
  auto r = repair_record();
  {
    RunLogWriter w(path);
    w.append(r);
  }
  {
    RunLogWriter w(path);
    w.append(std::vector<RunRecord>{r, r});
  }
  auto back = read_run_log(path);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[2], r);
  std::filesystem::remove(path);
}

TEST(RunLog, MalformedLineIsNamed) {
  auto path = std::filesystem::temp_directory_path() / "loopinv_run_record_bad.jsonl";
  {
    std::ofstream out(path);
    out << to_json(repair_record()).dump() << "\n\n" << R"({"id": "x"})" << "\n";
  }
  try {
    read_run_log(path);
    FAIL();
  } catch (const RunLogError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  {
    std::ofstream out(path);
    auto j = to_json(repair_record());
    j["outcome"]["kind"] = "wonderful";
    out << j.dump() << "\n";
  }
  EXPECT_THROW(read_run_log(path), RunLogError);
  std::filesystem::remove(path);
}

TEST(RunLog, UnwritablePath) {
  EXPECT_THROW(RunLogWriter("/nonexistent-dir/log.jsonl"), RunLogError);
}
