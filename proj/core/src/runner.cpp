#include "loopinv/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace loopinv {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string condition_key(Condition c) {
  std::string s(to_string(c));
  s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

RunRecord failure_record(const SynthesisProblem& problem, std::string strategy, Phase phase,
                         std::string id, OutcomeKind kind, std::string detail) {
  RunRecord r;
  r.id = std::move(id);
  r.problem_id = problem.id;
  r.strategy = std::move(strategy);
  r.phase = phase;
  r.sample_index = -1;
  r.outcome.kind = kind;
  r.outcome.detail = std::move(detail);
  return r;
}

// Asks the client and turns every per-problem failure into a record. Replay
// misses and corrupt replay files are configuration errors and propagate.
std::optional<std::vector<std::string>> request_or_record(LlmClient& client,
                                                          const ChatRequest& request,
                                                          std::size_t token_limit,
                                                          RunRecord failure,
                                                          std::vector<RunRecord>& out) {
  auto start = Clock::now();
  try {
    check_token_limit(request.prompt, token_limit);
    return client.complete(request);
  } catch (const TokenLimitExceeded& e) {
    failure.outcome.kind = OutcomeKind::TokenLimit;
    failure.outcome.detail = e.what();
  } catch (const ProviderError& e) {
    if (e.kind() == ProviderError::Kind::ReplayMiss ||
        e.kind() == ProviderError::Kind::CorruptRecord)
      throw;
    failure.outcome.kind = e.kind() == ProviderError::Kind::TokenLimitExceeded
                               ? OutcomeKind::TokenLimit
                               : OutcomeKind::RequestFailed;
    failure.outcome.detail = std::string(to_string(e.kind())) + ": " + e.what();
  }
  failure.elapsed_ms = ms_since(start);
  out.push_back(std::move(failure));
  return std::nullopt;
}

std::optional<std::vector<SortedVar>> read_params(const SExpr& list) {
  if (!list.is_list()) return std::nullopt;
  std::vector<SortedVar> out;
  for (const auto& p : list.children()) {
    if (!p.is_list() || p.children().size() != 2 || !p.children()[0].is_symbol() ||
        !p.children()[1].is_symbol())
      return std::nullopt;
    auto sort = parse_sort(p.children()[1].symbol_name());
    if (!sort) return std::nullopt;
    out.push_back({p.children()[0].symbol_name(), *sort});
  }
  return out;
}

CandidateInvariant from_located(const ParsedInvariant& located, const SynthesisProblem& problem) {
  return {located.body, located.params.value_or(problem.inv_params), {}};
}

bool repairable(const RecordOutcome& o) {
  return o.kind == OutcomeKind::Violated || o.kind == OutcomeKind::IllFormed;
}

}  // namespace

std::string_view to_string(StrategyFamily f) {
  switch (f) {
    case StrategyFamily::ZeroShot:
      return "zero-shot";
    case StrategyFamily::Instruction:
      return "instruction";
    case StrategyFamily::FewShot:
      return "few-shot";
    case StrategyFamily::Integrated:
      return "integrated";
  }
  return "?";
}

std::optional<StrategyFamily> parse_strategy_family(std::string_view name) {
  for (auto f : {StrategyFamily::ZeroShot, StrategyFamily::Instruction, StrategyFamily::FewShot,
                 StrategyFamily::Integrated})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

std::string GenerationStrategy::name() const {
  if (family == StrategyFamily::ZeroShot || family == StrategyFamily::Instruction)
    return std::string(to_string(family));
  std::string s = std::string(to_string(family)) + "(" + std::string(to_string(example_type)) +
                  "," + std::to_string(examples_n);
  if (metric == SimilarityMetric::Semantic) s += ",semantic";
  return s + ")";
}

std::optional<CandidateInvariant> record_candidate(const RunRecord& r) {
  if (!r.invariant) return std::nullopt;
  std::vector<SExpr> forms;
  try {
    forms = parse_sexprs(*r.invariant);
  } catch (const ParseError&) {
    return std::nullopt;
  }
  if (forms.size() != 1) return std::nullopt;
  const SExpr& f = forms.front();
  if (f.head() != "define-fun" || f.children().size() != 5) return std::nullopt;
  auto params = read_params(f.children()[2]);
  if (!params) return std::nullopt;
  return CandidateInvariant{f.children()[4], *params, {}};
}

Runner::Runner(LlmClient& client, RunConfig config, ConditionChecker checker)
    : client_(client), config_(std::move(config)), checker_(std::move(checker)) {
  if (config_.k < 1) throw Error("k must be at least 1");
  if (!checker_) {
    SolverConfig solver = config_.solver;
    checker_ = [solver](const SynthesisProblem& p, const CandidateInvariant& c, Condition cond) {
      return check_condition(p, c, cond, solver);
    };
  }
}

VerificationOutcome Runner::check(const SynthesisProblem& problem,
                                  const CandidateInvariant& c) const {
  return verify(problem, c, checker_);
}

ChatRequest Runner::make_request(Prompt prompt, std::size_t samples, std::string tag) const {
  return ChatRequest{.prompt = std::move(prompt),
                     .temperature = config_.temperature,
                     .num_samples = samples,
                     .max_output_tokens = config_.max_output_tokens,
                     .model_id = config_.model_id,
                     .tag = std::move(tag)};
}

RunRecord Runner::sample_record(const SynthesisProblem& problem, const std::string& response,
                                ExtractionReport& report) const {
  RunRecord r;
  r.problem_id = problem.id;
  r.response = response;
  report = extract_invariant(response, problem, config_.sanitize);
  for (const auto& f : report.applied_fixes) r.extraction.fixes.push_back(to_string(f));
  r.extraction.ok = report.candidate.has_value();
  if (report.failure) r.extraction.failure = report.failure->message();
  if (report.candidate)
    r.invariant = print_define_fun(problem.inv_name, report.candidate->params, report.candidate->body);
  else if (report.located)
    r.invariant = print_define_fun(problem.inv_name,
                                   report.located->params.value_or(problem.inv_params),
                                   report.located->body);
  if (!report.candidate) {
    r.outcome.kind = OutcomeKind::IllFormed;
    r.outcome.detail = report.failure->message();
  }
  return r;
}

Prompt Runner::strategy_prompt(const SynthesisProblem& problem) const {
  const auto& s = config_.strategy;
  if (s.family == StrategyFamily::ZeroShot) return build_zero_shot_prompt(problem);
  if (s.family == StrategyFamily::Instruction) return build_instruction_prompt(problem);

  std::vector<CorpusEntry> eligible;
  for (const auto& e : corpus_) {
    if (e.problem.id == problem.id) continue;
    bool ok = s.example_type == ExampleType::Positive   ? e.has_valid()
              : s.example_type == ExampleType::Negative ? e.has_violated()
                                                        : e.has_valid() && e.has_violated();
    if (ok) eligible.push_back(e);
  }
  std::vector<FewShotExample> examples;
  if (!eligible.empty() && s.examples_n > 0)
    examples = select_examples(top_k_examples(problem, eligible, s.examples_n, s.metric),
                               s.example_type);
  if (s.family == StrategyFamily::FewShot) {
    if (eligible.empty()) throw EmptyCorpus();
    return build_fewshot_prompt(problem, examples, s.example_type);
  }
  return build_integrated_prompt(problem, examples, s.example_type);
}

template <class Fn>
std::vector<RunRecord> Runner::for_each_problem(const std::vector<SynthesisProblem>& problems,
                                                RunLogWriter& writer,
                                                const std::vector<RunRecord>& existing, Fn&& fn) {
  std::set<std::string> have;
  for (const auto& r : existing) have.insert(r.id);

  const std::size_t n = problems.size();
  std::vector<std::optional<std::vector<RunRecord>>> results(n);
  std::vector<RunRecord> committed;
  std::size_t next_commit = 0;
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      std::vector<RunRecord> recs;
      try {
        recs = fn(problems[i], have);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        return;
      }
      recs.erase(std::remove_if(recs.begin(), recs.end(),
                                [&](const RunRecord& r) { return have.count(r.id) > 0; }),
                 recs.end());
      std::lock_guard lock(mutex);
      results[i] = std::move(recs);
      while (next_commit < n && results[next_commit]) {
        writer.append(*results[next_commit]);
        for (auto& r : *results[next_commit]) committed.push_back(std::move(r));
        results[next_commit].reset();
        ++next_commit;
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(config_.jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return committed;
}

std::vector<RunRecord> Runner::run_generation(const std::vector<SynthesisProblem>& problems,
                                              RunLogWriter& writer,
                                              const std::vector<RunRecord>& existing) {
  const std::string strategy = config_.strategy.name();
  return for_each_problem(problems, writer, existing,
                          [&](const SynthesisProblem& p, const std::set<std::string>& have) {
                            const std::string base = p.id + "/" + strategy + "/";
                            bool complete = have.count(base + "request") > 0;
                            if (!complete) {
                              complete = true;
                              for (std::size_t i = 0; i < config_.k && complete; ++i)
                                complete = have.count(base + std::to_string(i)) > 0;
                            }
                            return complete ? std::vector<RunRecord>{} : generate_one(p);
                          });
}

std::vector<RunRecord> Runner::generate_one(const SynthesisProblem& problem) {
  const std::string strategy = config_.strategy.name();
  const std::string base = problem.id + "/" + strategy + "/";
  std::vector<RunRecord> out;
  RunRecord failure =
      failure_record(problem, strategy, Phase::Generate, base + "request", OutcomeKind::RequestFailed, {});

  std::optional<Prompt> prompt;
  try {
    prompt = strategy_prompt(problem);
  } catch (const Error& e) {
    failure.outcome.detail = std::string("cannot build prompt: ") + e.what();
    out.push_back(std::move(failure));
    return out;
  }
  ChatRequest request = make_request(std::move(*prompt), config_.k, problem.id + "/" + strategy);
  auto responses = request_or_record(client_, request, config_.token_limit, failure, out);
  if (!responses) return out;

  const std::string digest = request_digest(request).substr(0, 16);
  for (std::size_t i = 0; i < responses->size(); ++i) {
    auto start = Clock::now();
    ExtractionReport report;
    RunRecord r = sample_record(problem, (*responses)[i], report);
    r.id = base + std::to_string(i);
    r.strategy = strategy;
    r.phase = Phase::Generate;
    r.sample_index = static_cast<int>(i);
    r.response_id = digest + "#" + std::to_string(i);
    if (report.candidate) r.outcome = to_record_outcome(check(problem, *report.candidate));
    r.elapsed_ms = ms_since(start);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> Runner::run_partial_pipeline(const std::vector<SynthesisProblem>& problems,
                                                    RunLogWriter& writer,
                                                    const std::vector<RunRecord>& existing) {
  return for_each_problem(problems, writer, existing,
                          [&](const SynthesisProblem& p, const std::set<std::string>& have) {
                            const std::string base = p.id + "/partial/final/";
                            bool complete = have.count(base + "request") > 0;
                            if (!complete) {
                              complete = true;
                              for (std::size_t i = 0; i < config_.k_final && complete; ++i)
                                complete = have.count(base + std::to_string(i)) > 0;
                            }
                            return complete ? std::vector<RunRecord>{} : partial_one(p);
                          });
}

std::vector<RunRecord> Runner::partial_one(const SynthesisProblem& problem) {
  const std::string strategy = "partial";
  std::vector<RunRecord> out;
  std::vector<ConditionalAttempt> attempts;

  for (Condition c : kAllConditions) {
    const std::string base = problem.id + "/partial/" + condition_key(c) + "/";
    RunRecord failure = failure_record(problem, strategy, Phase::Conditional, base + "request",
                                       OutcomeKind::RequestFailed, {});
    failure.target_condition = c;
    ChatRequest request = make_request(build_partial_prompt(problem, c), config_.k_partial,
                                       problem.id + "/partial/" + condition_key(c));
    auto responses = request_or_record(client_, request, config_.token_limit, failure, out);
    if (!responses) continue;

    const std::string digest = request_digest(request).substr(0, 16);
    for (std::size_t i = 0; i < responses->size(); ++i) {
      auto start = Clock::now();
      ExtractionReport report;
      RunRecord r = sample_record(problem, (*responses)[i], report);
      r.id = base + std::to_string(i);
      r.strategy = strategy;
      r.phase = Phase::Conditional;
      r.target_condition = c;
      r.sample_index = static_cast<int>(i);
      r.response_id = digest + "#" + std::to_string(i);
      if (report.candidate) r.outcome = to_record_outcome(checker_(problem, *report.candidate, c));
      r.elapsed_ms = ms_since(start);
      std::string shown = r.invariant.value_or(r.response);
      attempts.push_back({c, shown, r.outcome.kind == OutcomeKind::Holds});
      out.push_back(std::move(r));
    }
  }

  const std::string base = problem.id + "/partial/final/";
  RunRecord failure =
      failure_record(problem, strategy, Phase::Final, base + "request", OutcomeKind::RequestFailed, {});
  if (attempts.empty()) {
    failure.outcome.detail = "no conditional invariants to combine";
    out.push_back(std::move(failure));
    return out;
  }
  ChatRequest request = make_request(build_combine_prompt(problem, attempts), config_.k_final,
                                     problem.id + "/partial/final");
  auto responses = request_or_record(client_, request, config_.token_limit, failure, out);
  if (!responses) return out;

  const std::string digest = request_digest(request).substr(0, 16);
  for (std::size_t i = 0; i < responses->size(); ++i) {
    auto start = Clock::now();
    ExtractionReport report;
    RunRecord r = sample_record(problem, (*responses)[i], report);
    r.id = base + std::to_string(i);
    r.strategy = strategy;
    r.phase = Phase::Final;
    r.sample_index = static_cast<int>(i);
    r.response_id = digest + "#" + std::to_string(i);
    if (report.candidate) r.outcome = to_record_outcome(check(problem, *report.candidate));
    r.elapsed_ms = ms_since(start);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> Runner::run_repair(const std::vector<RunRecord>& log,
                                          const std::vector<SynthesisProblem>& problems,
                                          RunLogWriter& writer) {
  std::set<std::string> known;
  for (const auto& p : problems) known.insert(p.id);

  // Seeds per problem, grouped by generating strategy in log order.
  std::map<std::string, std::vector<RunRecord>> seeds;
  std::map<std::pair<std::string, std::string>, std::size_t> taken;
  for (const auto& r : log) {
    if (r.phase != Phase::Generate && r.phase != Phase::Final) continue;
    if (!known.count(r.problem_id))
      throw Error("log mentions problem '" + r.problem_id + "' which was not loaded");
    if (!repairable(r.outcome) || !r.invariant) continue;
    auto& n = taken[{r.problem_id, r.strategy}];
    if (n >= config_.repair.max_failed_candidates) continue;
    ++n;
    seeds[r.problem_id].push_back(r);
  }

  std::set<std::string> lineages_done;
  for (const auto& r : log)
    if (r.phase == Phase::Repair) lineages_done.insert(r.lineage_id);

  return for_each_problem(problems, writer, log,
                          [&](const SynthesisProblem& p, const std::set<std::string>&) {
                            std::vector<RunRecord> out;
                            auto it = seeds.find(p.id);
                            if (it == seeds.end()) return out;
                            for (const auto& seed : it->second) {
                              if (lineages_done.count(seed.id)) continue;
                              auto recs = repair_lineage(p, seed);
                              out.insert(out.end(), recs.begin(), recs.end());
                            }
                            return out;
                          });
}

std::vector<RunRecord> Runner::repair_lineage(const SynthesisProblem& problem, const RunRecord& seed) {
  const auto kind = config_.repair.detail == RepairDetail::CauseOnly
                        ? PromptKind(prompt_kind::RepairCause{})
                        : PromptKind(prompt_kind::RepairCounterexample{});
  const std::string strategy = to_string(kind);
  std::vector<RunRecord> out;

  auto lineage_record = [&](RunRecord r, int attempt, const std::string& parent) {
    r.id = seed.id + "/" + strategy + "/" + std::to_string(attempt);
    r.problem_id = problem.id;
    r.strategy = strategy;
    r.phase = Phase::Repair;
    r.sample_index = seed.sample_index;
    r.lineage_id = seed.id;
    r.parent_id = parent;
    r.attempt = attempt;
    return r;
  };

  std::optional<CandidateInvariant> current = record_candidate(seed);
  std::optional<VerificationOutcome> outcome = to_verification_outcome(seed.outcome);
  if (!current || !outcome) return out;

  // A response that only failed because of leftover formatting is fixed by
  // the default sanitizer without asking the model again.
  if (seed.outcome.kind == OutcomeKind::IllFormed) {
    auto start = Clock::now();
    ExtractionReport report = extract_invariant(seed.response, problem, SanitizeOptions{});
    if (report.candidate) {
      VerificationOutcome v = check(problem, *report.candidate);
      if (is_valid(v)) {
        RunRecord r;
        r.response = seed.response;
        r.response_id = seed.response_id;
        r.invariant = print_define_fun(problem.inv_name, report.candidate->params,
                                       report.candidate->body);
        r.extraction.ok = true;
        for (const auto& f : report.applied_fixes) r.extraction.fixes.push_back(to_string(f));
        r.outcome.kind = OutcomeKind::ExtractorFixed;
        r.outcome.detail = "valid after sanitization";
        r.elapsed_ms = ms_since(start);
        out.push_back(lineage_record(std::move(r), 0, seed.id));
        return out;
      }
      if (std::holds_alternative<verdict::Violated>(v) ||
          std::holds_alternative<verdict::IllFormed>(v)) {
        current = *report.candidate;
        outcome = v;
      }
    }
  }

  std::set<std::string> seen{print_sexpr(current->body)};
  std::string parent = seed.id;
  for (std::size_t attempt = 1; attempt <= config_.repair.max_iterations; ++attempt) {
    const int a = static_cast<int>(attempt);
    Prompt prompt = build_repair_prompt(problem, *current, *outcome, config_.repair.detail);
    ChatRequest request = make_request(std::move(prompt), 1,
                                       seed.id + "/repair/" + std::to_string(attempt));
    RunRecord failure = lineage_record(RunRecord{}, a, parent);
    failure.outcome.kind = OutcomeKind::RequestFailed;
    std::vector<RunRecord> failed;
    auto responses = request_or_record(client_, request, config_.token_limit, failure, failed);
    if (!responses) {
      out.insert(out.end(), failed.begin(), failed.end());
      break;
    }

    auto start = Clock::now();
    ExtractionReport report;
    RunRecord r = lineage_record(sample_record(problem, responses->front(), report), a, parent);
    r.response_id = request_digest(request).substr(0, 16) + "#0";

    std::optional<std::string> printed;
    if (report.located) printed = print_sexpr(report.located->body);
    if (config_.repair.detect_cycles && printed && seen.count(*printed)) {
      r.outcome = {OutcomeKind::CycleDetected, std::nullopt, std::nullopt,
                   "repeats an earlier candidate of this lineage: " + *printed};
      r.elapsed_ms = ms_since(start);
      out.push_back(std::move(r));
      break;
    }

    if (report.candidate) {
      VerificationOutcome v = check(problem, *report.candidate);
      r.outcome = to_record_outcome(v);
      current = *report.candidate;
      outcome = v;
    } else {
      if (report.located) current = from_located(*report.located, problem);
      outcome = verdict::IllFormed{report.failure->message()};
    }
    r.elapsed_ms = ms_since(start);
    const OutcomeKind k = r.outcome.kind;
    parent = r.id;
    out.push_back(std::move(r));
    if (k != OutcomeKind::Violated && k != OutcomeKind::IllFormed) break;
    if (printed) seen.insert(*printed);
  }
  return out;
}

}  // namespace loopinv
