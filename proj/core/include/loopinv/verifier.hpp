#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loopinv/evaluator.hpp"
#include "loopinv/problem.hpp"

namespace loopinv {

/// The three inductive-invariant obligations, in reporting order.
enum class Condition { Initiation, Consecution, Safety };

inline constexpr std::array<Condition, 3> kAllConditions = {
    Condition::Initiation, Condition::Consecution, Condition::Safety};

std::string_view to_string(Condition c);
std::optional<Condition> parse_condition(std::string_view name);

/// A satisfying assignment of the negated condition.
struct Counterexample {
  std::map<std::string, Value> assignments;

  bool operator==(const Counterexample&) const = default;
};

namespace verdict {
struct Valid {
  bool operator==(const Valid&) const = default;
};
struct Holds {
  bool operator==(const Holds&) const = default;
};
struct Violated {
  Condition condition;
  Counterexample model;
  bool operator==(const Violated&) const = default;
};
struct IllFormed {
  std::string reason;
  bool operator==(const IllFormed&) const = default;
};
struct Timeout {
  Condition condition;
  bool operator==(const Timeout&) const = default;
};
struct SolverFailure {
  std::string diagnostic;
  bool operator==(const SolverFailure&) const = default;
};
}  // namespace verdict

/// Result of checking a single condition.
using ConditionVerdict =
    std::variant<verdict::Holds, verdict::Violated, verdict::Timeout, verdict::SolverFailure>;

/// Result of checking all three conditions. Violated always names the first
/// failing condition in Initiation < Consecution < Safety order.
using VerificationOutcome = std::variant<verdict::Valid, verdict::Violated, verdict::IllFormed,
                                         verdict::Timeout, verdict::SolverFailure>;

std::string describe(const ConditionVerdict& v);
std::string describe(const VerificationOutcome& v);
inline bool is_valid(const VerificationOutcome& v) {
  return std::holds_alternative<verdict::Valid>(v);
}

struct SolverConfig {
  std::string executable = "z3";
  /// Arguments that make the solver read SMT-LIB2 from stdin.
  std::vector<std::string> args = {"-in"};
  std::chrono::milliseconds timeout{10000};
  /// Passed through to the solver verbatim, after `args` (e.g. seeds).
  std::vector<std::string> extra_options;
  /// Upper bound on simultaneously running solver processes.
  std::size_t max_concurrent = 4;

  /// Defaults, with the executable overridden by LOOPINV_SOLVER when set.
  static SolverConfig from_env();
};

/// SMT-LIB2 script whose satisfiability witnesses a violation of `condition`.
/// Declares the relevant state constants (primed ones only for Consecution),
/// defines the four functions, asserts the negated implication, and ends with
/// (check-sat) (get-model).
std::string build_vc_script(const SynthesisProblem& problem, const CandidateInvariant& candidate,
                            Condition condition);

/// The implication of `condition` as an S-expression over the function names,
/// e.g. (=> (pre_fun x y) (inv_fun x y)).
SExpr condition_formula(const SynthesisProblem& problem, Condition condition);

enum class SolverVerdict { Sat, Unsat, Unknown };

struct SolverReply {
  SolverVerdict verdict = SolverVerdict::Unknown;
  std::optional<Counterexample> model;
};

class MalformedModelError : public Error {
 public:
  using Error::Error;
};

/// Decodes solver stdout. The first non-empty line decides the verdict; on
/// `sat` the following define-fun block becomes the model, with `(- N)`
/// read as a negative literal.
SolverReply parse_solver_output(std::string_view text);

/// Runs the solver for one condition. Never throws for solver-side problems;
/// they come back as Timeout or SolverFailure.
ConditionVerdict check_condition(const SynthesisProblem& problem,
                                 const CandidateInvariant& candidate, Condition condition,
                                 const SolverConfig& cfg);

using ConditionChecker =
    std::function<ConditionVerdict(const SynthesisProblem&, const CandidateInvariant&, Condition)>;

/// Normalizes the candidate, then checks Initiation, Consecution and Safety in
/// order, stopping at the first condition that does not hold.
VerificationOutcome verify(const SynthesisProblem& problem, const CandidateInvariant& candidate,
                           const SolverConfig& cfg);
VerificationOutcome verify(const SynthesisProblem& problem, const CandidateInvariant& candidate,
                           const ConditionChecker& checker);

/// Evaluates the implication of `condition` under a concrete assignment of
/// the state (and, for Consecution, primed state) variables. Unassigned
/// variables default to 0 / false.
bool condition_holds_at(const SynthesisProblem& problem, const CandidateInvariant& candidate,
                        Condition condition, const Env& assignment);

}  // namespace loopinv
