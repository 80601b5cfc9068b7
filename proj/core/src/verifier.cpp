#include "loopinv/verifier.hpp"

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "loopinv/extractor.hpp"
#include "process.hpp"

namespace loopinv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class SolverSlots {
 public:
  void acquire(std::size_t cap) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return active_ < std::max<std::size_t>(cap, 1); });
    ++active_;
  }
  void release() {
    {
      std::lock_guard lock(mutex_);
      --active_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t active_ = 0;
};

SolverSlots& solver_slots() {
  static SolverSlots slots;
  return slots;
}

class SlotGuard {
 public:
  explicit SlotGuard(std::size_t cap) { solver_slots().acquire(cap); }
  ~SlotGuard() { solver_slots().release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;
};

SExpr apply_fn(const std::string& fn, const std::vector<std::string>& args) {
  if (args.empty()) return SExpr::symbol(fn);
  SExpr::List app{SExpr::symbol(fn)};
  for (const auto& a : args) app.push_back(SExpr::symbol(a));
  return SExpr::list(std::move(app));
}

std::vector<std::string> names(const std::vector<SortedVar>& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(v.name);
  return out;
}

std::vector<SortedVar> condition_vars(const SynthesisProblem& p, Condition c) {
  return c == Condition::Consecution ? p.state_and_next() : p.inv_params;
}

Value default_value(Sort s) { return s == Sort::Int ? Value(BigInt(0)) : Value(false); }

Value decode_model_value(const SExpr& e) {
  if (e.is_int()) return e.int_value();
  if (e.is_bool()) return e.bool_value();
  if (e.is_list() && e.children().size() == 2 && e.children()[0].is_symbol("-") &&
      e.children()[1].is_int())
    return BigInt(-e.children()[1].int_value());
  throw MalformedModelError("unsupported model value " + print_sexpr(e));
}

void collect_model_entries(const SExpr& e, std::vector<const SExpr*>& out) {
  if (!e.is_list()) throw MalformedModelError("unexpected model token " + print_sexpr(e));
  if (e.head() == "define-fun") {
    out.push_back(&e);
    return;
  }
  if (e.head() == "error") throw MalformedModelError("solver error " + print_sexpr(e));
  const auto& kids = e.children();
  std::size_t start = e.head() == "model" ? 1 : 0;
  for (std::size_t i = start; i < kids.size(); ++i) collect_model_entries(kids[i], out);
}

std::string first_line_token(std::string_view text, std::size_t& rest_pos) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b != std::string_view::npos) {
      std::size_t e = line.find_last_not_of(" \t\r");
      rest_pos = eol == std::string_view::npos ? text.size() : eol + 1;
      return std::string(line.substr(b, e - b + 1));
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  rest_pos = text.size();
  return {};
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Initiation:
      return "Initiation";
    case Condition::Consecution:
      return "Consecution";
    case Condition::Safety:
      return "Safety";
  }
  return "?";
}

std::optional<Condition> parse_condition(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "initiation" || lower == "r1" || lower == "pre") return Condition::Initiation;
  if (lower == "consecution" || lower == "r2" || lower == "trans") return Condition::Consecution;
  if (lower == "safety" || lower == "r3" || lower == "post") return Condition::Safety;
  return std::nullopt;
}

std::string describe(const ConditionVerdict& v) {
  return std::visit(overloaded{
                        [](const verdict::Holds&) { return std::string("Holds"); },
                        [](const verdict::Violated& x) {
                          std::string s = "Violated(" + std::string(to_string(x.condition)) + ")";
                          for (const auto& [k, val] : x.model.assignments)
                            s += " " + k + "=" + to_string(val);
                          return s;
                        },
                        [](const verdict::Timeout& x) {
                          return "Timeout(" + std::string(to_string(x.condition)) + ")";
                        },
                        [](const verdict::SolverFailure& x) {
                          return "SolverFailure(" + x.diagnostic + ")";
                        },
                    },
                    v);
}

std::string describe(const VerificationOutcome& v) {
  return std::visit(overloaded{
                        [](const verdict::Valid&) { return std::string("Valid"); },
                        [](const verdict::IllFormed& x) { return "IllFormed(" + x.reason + ")"; },
                        [](const auto& x) { return describe(ConditionVerdict(x)); },
                    },
                    v);
}

SolverConfig SolverConfig::from_env() {
  SolverConfig cfg;
  if (const char* env = std::getenv("LOOPINV_SOLVER"); env != nullptr && *env != '\0')
    cfg.executable = env;
  return cfg;
}

SExpr condition_formula(const SynthesisProblem& p, Condition c) {
  const auto state = names(p.inv_params);
  std::vector<std::string> next;
  for (const auto& v : p.inv_params) next.push_back(primed(v));
  auto implies = [](SExpr a, SExpr b) {
    return SExpr::list({SExpr::symbol("=>"), std::move(a), std::move(b)});
  };
  switch (c) {
    case Condition::Initiation:
      return implies(apply_fn(p.pre_f.name, state), apply_fn(p.inv_name, state));
    case Condition::Consecution: {
      std::vector<std::string> both = state;
      both.insert(both.end(), next.begin(), next.end());
      SExpr lhs = SExpr::list(
          {SExpr::symbol("and"), apply_fn(p.inv_name, state), apply_fn(p.trans_f.name, both)});
      return implies(std::move(lhs), apply_fn(p.inv_name, next));
    }
    case Condition::Safety:
      return implies(apply_fn(p.inv_name, state), apply_fn(p.post_f.name, state));
  }
  throw Error("unknown condition");
}

std::string build_vc_script(const SynthesisProblem& p, const CandidateInvariant& candidate,
                            Condition c) {
  std::ostringstream out;
  out << "(set-option :produce-models true)\n";
  out << "(set-logic " << p.logic << ")\n";
  out << print_define_fun(p.pre_f) << "\n";
  out << print_define_fun(p.trans_f) << "\n";
  out << print_define_fun(p.post_f) << "\n";
  out << print_define_fun(p.inv_name, p.inv_params, candidate.body) << "\n";
  for (const auto& v : condition_vars(p, c))
    out << "(declare-const " << v.name << " " << to_string(v.sort) << ")\n";
  out << "(assert (not " << print_sexpr(condition_formula(p, c)) << "))\n";
  out << "(check-sat)\n";
  out << "(get-model)\n";
  return out.str();
}

SolverReply parse_solver_output(std::string_view text) {
  std::size_t rest = 0;
  std::string token = first_line_token(text, rest);
  SolverReply reply;
  if (token == "unsat") {
    reply.verdict = SolverVerdict::Unsat;
    return reply;
  }
  if (token == "unknown" || token == "timeout") {
    reply.verdict = SolverVerdict::Unknown;
    return reply;
  }
  if (token != "sat")
    throw MalformedModelError(token.empty() ? "empty solver output"
                                            : "unexpected solver verdict: " + token);

  reply.verdict = SolverVerdict::Sat;
  std::vector<SExpr> exprs;
  try {
    exprs = parse_sexprs(text.substr(rest));
  } catch (const ParseError& e) {
    throw MalformedModelError(std::string("cannot parse model: ") + e.what());
  }
  std::vector<const SExpr*> entries;
  for (const auto& e : exprs) collect_model_entries(e, entries);

  Counterexample model;
  for (const SExpr* entry : entries) {
    const auto& kids = entry->children();
    if (kids.size() != 5 || !kids[1].is_symbol() || !kids[2].is_list())
      throw MalformedModelError("malformed model entry " + print_sexpr(*entry));
    if (!kids[2].children().empty()) continue;  // function interpretations
    model.assignments[kids[1].symbol_name()] = decode_model_value(kids[4]);
  }
  reply.model = std::move(model);
  return reply;
}

ConditionVerdict check_condition(const SynthesisProblem& problem,
                                 const CandidateInvariant& candidate, Condition condition,
                                 const SolverConfig& cfg) {
  const std::string script = build_vc_script(problem, candidate, condition);
  std::vector<std::string> argv{cfg.executable};
  argv.insert(argv.end(), cfg.args.begin(), cfg.args.end());
  argv.insert(argv.end(), cfg.extra_options.begin(), cfg.extra_options.end());

  detail::ProcessResult run;
  {
    SlotGuard slot(cfg.max_concurrent);
    run = detail::run_process(argv, script, cfg.timeout);
  }
  if (run.spawn_error) return verdict::SolverFailure{*run.spawn_error};
  if (run.timed_out) return verdict::Timeout{condition};

  SolverReply reply;
  try {
    reply = parse_solver_output(run.stdout_text);
  } catch (const MalformedModelError& e) {
    std::string diag = e.what();
    diag += " (exit " + std::to_string(run.exit_code) + ")";
    if (!run.stdout_text.empty()) diag += "\nstdout: " + run.stdout_text;
    if (!run.stderr_text.empty()) diag += "\nstderr: " + run.stderr_text;
    return verdict::SolverFailure{diag};
  }

  switch (reply.verdict) {
    case SolverVerdict::Unsat:
      return verdict::Holds{};
    case SolverVerdict::Unknown:
      return verdict::Timeout{condition};
    case SolverVerdict::Sat:
      break;
  }
  Counterexample model;
  for (const auto& v : condition_vars(problem, condition)) {
    auto it = reply.model->assignments.find(v.name);
    model.assignments[v.name] =
        it != reply.model->assignments.end() ? it->second : default_value(v.sort);
  }
  return verdict::Violated{condition, std::move(model)};
}

VerificationOutcome verify(const SynthesisProblem& problem, const CandidateInvariant& candidate,
                           const ConditionChecker& checker) {
  CandidateInvariant normalized;
  try {
    normalized = normalize_signature(candidate, problem);
  } catch (const NormalizationError& e) {
    return verdict::IllFormed{e.what()};
  }
  for (Condition c : kAllConditions) {
    ConditionVerdict v = checker(problem, normalized, c);
    if (std::holds_alternative<verdict::Holds>(v)) continue;
    return std::visit(
        overloaded{
            [](const verdict::Holds&) -> VerificationOutcome { return verdict::Valid{}; },
            [](const auto& x) -> VerificationOutcome { return x; },
        },
        std::move(v));
  }
  return verdict::Valid{};
}

VerificationOutcome verify(const SynthesisProblem& problem, const CandidateInvariant& candidate,
                           const SolverConfig& cfg) {
  return verify(problem, candidate,
                [&cfg](const SynthesisProblem& p, const CandidateInvariant& c, Condition cond) {
                  return check_condition(p, c, cond, cfg);
                });
}

bool condition_holds_at(const SynthesisProblem& p, const CandidateInvariant& candidate,
                        Condition c, const Env& assignment) {
  Env state;
  Env next;
  for (const auto& v : p.inv_params) {
    auto it = assignment.find(v.name);
    state[v.name] = it != assignment.end() ? it->second : default_value(v.sort);
    auto jt = assignment.find(primed(v));
    next[v.name] = jt != assignment.end() ? jt->second : default_value(v.sort);
  }
  auto inv = [&](const Env& env) { return evaluate_bool(candidate.body, env); };
  switch (c) {
    case Condition::Initiation:
      return !evaluate_bool(p.pre_f.body, state) || inv(state);
    case Condition::Consecution: {
      Env both = state;
      for (const auto& v : p.inv_params) both[primed(v)] = next[v.name];
      return !(inv(state) && evaluate_bool(p.trans_f.body, both)) || inv(next);
    }
    case Condition::Safety:
      return !inv(state) || evaluate_bool(p.post_f.body, state);
  }
  return true;
}

}  // namespace loopinv
