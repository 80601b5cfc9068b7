// Command line front end: generate, partial, repair, verify, retrieve, report.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "loopinv/extractor.hpp"
#include "loopinv/llm_client.hpp"
#include "loopinv/metrics.hpp"
#include "loopinv/problem.hpp"
#include "loopinv/retrieval.hpp"
#include "loopinv/run_record.hpp"
#include "loopinv/runner.hpp"
#include "loopinv/verifier.hpp"

namespace {

using namespace loopinv;

struct ProviderOptions {
  std::string replay;
  std::string record;
  std::string script;
  std::string provider_config;
  std::string model;
  double temperature = 0.7;
  double rpm = 0.0;
};

struct SolverOptions {
  std::string solver;
  long timeout_ms = 10000;
};

struct CommonRun {
  std::string problems;
  std::string out;
  std::size_t token_limit = kDefaultTokenLimit;
  std::size_t jobs = 1;
  std::string strip_keywords = "default";
};

void add_provider_options(CLI::App* cmd, ProviderOptions& o) {
  cmd->add_option("--replay", o.replay, "Serve completions from a recorded session (JSON Lines)");
  cmd->add_option("--record", o.record, "Append every completion to this session file");
  cmd->add_option("--script", o.script, "Answer from a JSON script keyed by request tag");
  cmd->add_option("--provider-config", o.provider_config,
                  "JSON settings for an OpenAI-compatible endpoint");
  cmd->add_option("--model", o.model, "Model id sent with every request");
  cmd->add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();
  cmd->add_option("--rpm", o.rpm, "Request rate limit per minute (0 = off)");
}

void add_solver_options(CLI::App* cmd, SolverOptions& o) {
  cmd->add_option("--solver", o.solver, "SMT solver executable (default: $LOOPINV_SOLVER or z3)");
  cmd->add_option("--timeout-ms", o.timeout_ms, "Per-condition solver timeout")->capture_default_str();
}

void add_run_options(CLI::App* cmd, CommonRun& o, bool need_problems = true) {
  auto* p = cmd->add_option("--problems", o.problems, "Directory of .sl problems");
  if (need_problems) p->required();
  cmd->add_option("--token-limit", o.token_limit, "Reject prompts above this token estimate")
      ->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "Problems processed in parallel")->capture_default_str();
  cmd->add_option("--strip-keywords", o.strip_keywords,
                  "Comma-separated words stripped before an expression, 'default' or 'none'")
      ->capture_default_str();
}

SolverConfig solver_config(const SolverOptions& o) {
  SolverConfig cfg = SolverConfig::from_env();
  if (!o.solver.empty()) cfg.executable = o.solver;
  cfg.timeout = std::chrono::milliseconds(o.timeout_ms);
  return cfg;
}

SanitizeOptions sanitize_options(const std::string& spec) {
  if (spec == "default") return {};
  SanitizeOptions out{{}};
  if (spec == "none") return out;
  std::stringstream in(spec);
  std::string word;
  while (std::getline(in, word, ','))
    if (!word.empty()) out.keywords.push_back(word);
  return out;
}

struct ProviderStack {
  std::unique_ptr<Provider> base;
  std::unique_ptr<RecordingProvider> recorder;
  std::string model_id = "default";

  Provider& top() { return recorder ? static_cast<Provider&>(*recorder) : *base; }
};

ProviderStack make_provider(const ProviderOptions& o) {
  ProviderStack s;
  int sources = !o.replay.empty() + !o.script.empty() + !o.provider_config.empty();
  if (sources != 1)
    throw Error("exactly one of --replay, --script or --provider-config is required");
  if (!o.replay.empty()) {
    s.base = std::make_unique<ReplayProvider>(ReplayProvider::from_file(o.replay));
  } else if (!o.script.empty()) {
    s.base = std::make_unique<ScriptedProvider>(ScriptedProvider::from_file(o.script));
  } else {
    auto cfg = load_openai_config(o.provider_config);
    s.model_id = cfg.model;
    s.base = std::make_unique<OpenAIChatProvider>(std::move(cfg));
  }
  if (!o.model.empty()) s.model_id = o.model;
  if (!o.record.empty()) s.recorder = std::make_unique<RecordingProvider>(*s.base, o.record);
  return s;
}

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::size_t> parse_ks(const std::string& spec) {
  std::vector<std::size_t> ks;
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long v = std::stoul(item, &pos);
    if (pos != item.size() || v == 0) throw Error("bad k value '" + item + "'");
    ks.push_back(v);
  }
  return ks;
}

void print_summary(const std::vector<RunRecord>& records) {
  std::size_t valid = 0;
  for (const auto& r : records) valid += r.outcome.kind == OutcomeKind::Valid;
  std::cerr << records.size() << " records written, " << valid << " valid\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop invariant synthesis workbench"};
  app.require_subcommand(1);

  ProviderOptions provider;
  SolverOptions solver;
  CommonRun run;

  // generate
  auto* gen = app.add_subcommand("generate", "Sample invariants with a prompting strategy");
  std::string strategy = "instruction", example_type = "positive", metric = "syntactic", corpus;
  std::size_t k = 50, examples_n = 2;
  gen->add_option("--strategy", strategy, "zero-shot, instruction, few-shot or integrated")
      ->capture_default_str();
  gen->add_option("--k", k, "Samples per problem")->capture_default_str();
  gen->add_option("--examples-n", examples_n, "Few-shot examples per prompt")->capture_default_str();
  gen->add_option("--example-type", example_type, "positive, negative or mixed")->capture_default_str();
  gen->add_option("--metric", metric, "syntactic or semantic")->capture_default_str();
  gen->add_option("--corpus", corpus, "Corpus directory for few-shot examples");
  gen->add_option("--out", run.out, "Run log (JSON Lines, appended)")->required();
  add_run_options(gen, run);
  add_provider_options(gen, provider);
  add_solver_options(gen, solver);

  // partial
  auto* partial = app.add_subcommand("partial", "Conditional invariants per condition, then combine");
  std::size_t k_partial = 10, k_final = 50;
  partial->add_option("--k-partial", k_partial, "Samples per condition")->capture_default_str();
  partial->add_option("--k-final", k_final, "Samples of the combined prompt")->capture_default_str();
  partial->add_option("--out", run.out, "Run log (JSON Lines, appended)")->required();
  add_run_options(partial, run);
  add_provider_options(partial, provider);
  add_solver_options(partial, solver);

  // repair
  auto* repair = app.add_subcommand("repair", "Repair failed candidates of a generation log");
  std::string log_path, detail = "cause";
  std::size_t max_candidates = 2, max_iterations = 5;
  bool no_cycles = false;
  repair->add_option("--log", log_path, "Generation log; repair records are appended to it")
      ->required();
  repair->add_option("--detail", detail, "cause or counterexample")->capture_default_str();
  repair->add_option("--max-candidates", max_candidates, "Failed samples repaired per problem")
      ->capture_default_str();
  repair->add_option("--max-iterations", max_iterations, "Repair attempts per candidate")
      ->capture_default_str();
  repair->add_flag("--no-cycle-detection", no_cycles, "Keep iterating over repeated candidates");
  add_run_options(repair, run);
  add_provider_options(repair, provider);
  add_solver_options(repair, solver);

  // verify
  auto* ver = app.add_subcommand("verify", "Check one invariant against one problem");
  std::string problem_file, invariant_file;
  ver->add_option("--problem", problem_file, "Problem (.sl)")->required();
  ver->add_option("--invariant", invariant_file, "File holding the invariant, - for stdin")->required();
  add_solver_options(ver, solver);

  // retrieve
  auto* ret = app.add_subcommand("retrieve", "Rank corpus problems by similarity");
  std::size_t n = 2;
  ret->add_option("--problem", problem_file, "Query problem (.sl)")->required();
  ret->add_option("--corpus", corpus, "Corpus directory")->required();
  ret->add_option("--n", n, "Neighbors to print")->capture_default_str();
  ret->add_option("--metric", metric, "syntactic or semantic")->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "Summarize a run log");
  std::string format = "text", ks_spec = "10,30,50";
  rep->add_option("--log", log_path, "Run log")->required();
  rep->add_option("--format", format, "text or json")->capture_default_str();
  rep->add_option("--ks", ks_spec, "Comma-separated k values")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    cfg.solver = solver_config(solver);
    cfg.token_limit = run.token_limit;
    cfg.jobs = std::max<std::size_t>(1, run.jobs);
    cfg.sanitize = sanitize_options(run.strip_keywords);
    cfg.temperature = provider.temperature;

    auto client_options = [&] {
      ClientOptions o;
      o.token_limit = run.token_limit;
      o.requests_per_minute = provider.rpm;
      return o;
    };

    if (gen->parsed()) {
      auto family = parse_strategy_family(strategy);
      auto type = parse_example_type(example_type);
      auto m = parse_metric(metric);
      if (!family) throw Error("unknown strategy '" + strategy + "'");
      if (!type) throw Error("unknown example type '" + example_type + "'");
      if (!m) throw Error("unknown metric '" + metric + "'");
      cfg.strategy = {*family, *type, examples_n, *m};
      cfg.k = k;
      auto stack = make_provider(provider);
      cfg.model_id = stack.model_id;
      LlmClient client(stack.top(), client_options());
      Runner runner(client, cfg);
      if (*family == StrategyFamily::FewShot || *family == StrategyFamily::Integrated) {
        if (corpus.empty()) throw Error("--corpus is required for " + strategy);
        runner.set_corpus(load_corpus(corpus));
      }
      auto problems = load_problem_dir(run.problems);
      auto existing = read_run_log(run.out);
      RunLogWriter writer(run.out);
      print_summary(runner.run_generation(problems, writer, existing));
    } else if (partial->parsed()) {
      cfg.k_partial = k_partial;
      cfg.k_final = k_final;
      auto stack = make_provider(provider);
      cfg.model_id = stack.model_id;
      LlmClient client(stack.top(), client_options());
      Runner runner(client, cfg);
      auto problems = load_problem_dir(run.problems);
      auto existing = read_run_log(run.out);
      RunLogWriter writer(run.out);
      print_summary(runner.run_partial_pipeline(problems, writer, existing));
    } else if (repair->parsed()) {
      auto d = parse_repair_detail(detail);
      if (!d) throw Error("unknown detail level '" + detail + "'");
      cfg.repair = {*d, max_candidates, max_iterations, !no_cycles};
      auto stack = make_provider(provider);
      cfg.model_id = stack.model_id;
      LlmClient client(stack.top(), client_options());
      Runner runner(client, cfg);
      auto problems = load_problem_dir(run.problems);
      auto log = read_run_log(log_path);
      RunLogWriter writer(log_path);
      print_summary(runner.run_repair(log, problems, writer));
    } else if (ver->parsed()) {
      auto problem = load_problem_file(problem_file);
      auto report = extract_invariant(read_file(invariant_file), problem);
      if (!report.candidate) {
        std::cout << describe(VerificationOutcome(verdict::IllFormed{report.failure->message()}))
                  << "\n";
      } else {
        std::cout << describe(verify(problem, *report.candidate, cfg.solver)) << "\n";
      }
    } else if (ret->parsed()) {
      auto m = parse_metric(metric);
      if (!m) throw Error("unknown metric '" + metric + "'");
      auto query = load_problem_file(problem_file);
      auto entries = load_corpus(corpus);
      for (const auto& r : top_k_examples(query, entries, n, *m)) {
        char score[32];
        std::snprintf(score, sizeof score, "%.4f", r.score.value);
        std::cout << score << "  " << r.entry->problem.id << "\n";
      }
    } else if (rep->parsed()) {
      auto metrics = summarize(read_run_log(log_path), parse_ks(ks_spec));
      if (format == "json")
        std::cout << report_json(metrics).dump(2) << "\n";
      else if (format == "text")
        std::cout << report_text(metrics);
      else
        throw Error("unknown format '" + format + "'");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
