#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loopinv/extractor.hpp"
#include "loopinv/llm_client.hpp"
#include "loopinv/prompts.hpp"
#include "loopinv/retrieval.hpp"
#include "loopinv/run_record.hpp"
#include "loopinv/verifier.hpp"

namespace loopinv {

enum class StrategyFamily { ZeroShot, Instruction, FewShot, Integrated };
std::string_view to_string(StrategyFamily f);
std::optional<StrategyFamily> parse_strategy_family(std::string_view name);

struct GenerationStrategy {
  StrategyFamily family = StrategyFamily::Instruction;
  ExampleType example_type = ExampleType::Positive;
  std::size_t examples_n = 2;
  SimilarityMetric metric = SimilarityMetric::Syntactic;

  /// Name used in run records: "instruction", "few-shot(positive,2)", ...
  std::string name() const;
};

struct RepairConfig {
  RepairDetail detail = RepairDetail::CauseOnly;
  std::size_t max_failed_candidates = 2;
  std::size_t max_iterations = 5;
  bool detect_cycles = true;
};

struct RunConfig {
  GenerationStrategy strategy;
  std::size_t k = 50;
  std::size_t k_partial = 10;
  std::size_t k_final = 50;
  SolverConfig solver;
  RepairConfig repair;
  std::size_t token_limit = kDefaultTokenLimit;
  double temperature = 0.7;
  std::string model_id = "default";
  std::size_t max_output_tokens = 1024;
  /// Problems processed concurrently.
  std::size_t jobs = 1;
  SanitizeOptions sanitize;
};

/// Drives generation, partial decomposition and repair. Records are handed to
/// the writer one problem at a time, in the order the problems were given,
/// and also returned. Records whose id is already in `existing` are skipped,
/// which makes re-running over an interrupted log a resume.
class Runner {
 public:
  /// `checker` defaults to the SMT solver configured in `config.solver`.
  Runner(LlmClient& client, RunConfig config, ConditionChecker checker = {});

  void set_corpus(std::vector<CorpusEntry> corpus) { corpus_ = std::move(corpus); }
  const RunConfig& config() const { return config_; }

  std::vector<RunRecord> run_generation(const std::vector<SynthesisProblem>& problems,
                                        RunLogWriter& writer,
                                        const std::vector<RunRecord>& existing = {});

  /// 3 x k_partial conditional records followed by k_final final records
  /// per problem (fewer only when a request fails).
  std::vector<RunRecord> run_partial_pipeline(const std::vector<SynthesisProblem>& problems,
                                              RunLogWriter& writer,
                                              const std::vector<RunRecord>& existing = {});

  /// Repairs the first max_failed_candidates Violated or IllFormed samples of
  /// every (problem, strategy) in `log`.
  std::vector<RunRecord> run_repair(const std::vector<RunRecord>& log,
                                    const std::vector<SynthesisProblem>& problems,
                                    RunLogWriter& writer);

 private:
  template <class Fn>
  std::vector<RunRecord> for_each_problem(const std::vector<SynthesisProblem>& problems,
                                          RunLogWriter& writer,
                                          const std::vector<RunRecord>& existing, Fn&& fn);

  std::vector<RunRecord> generate_one(const SynthesisProblem& problem);
  std::vector<RunRecord> partial_one(const SynthesisProblem& problem);
  std::vector<RunRecord> repair_lineage(const SynthesisProblem& problem, const RunRecord& seed);

  Prompt strategy_prompt(const SynthesisProblem& problem) const;
  ChatRequest make_request(Prompt prompt, std::size_t samples, std::string tag) const;
  RunRecord sample_record(const SynthesisProblem& problem, const std::string& response,
                          ExtractionReport& report) const;
  VerificationOutcome check(const SynthesisProblem& problem, const CandidateInvariant& c) const;

  LlmClient& client_;
  RunConfig config_;
  ConditionChecker checker_;
  std::vector<CorpusEntry> corpus_;
};

/// Rebuilds the candidate of a record from its stored invariant text.
std::optional<CandidateInvariant> record_candidate(const RunRecord& r);

}  // namespace loopinv
