#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loopinv/problem.hpp"

namespace loopinv {

enum class FixKind {
  StrippedFence,
  StrippedKeyword,
  BalancedParens,
  RenamedFunction,
  ReparamedSignature,
};

struct Fix {
  FixKind kind;
  /// The stripped keyword for StrippedKeyword, the original name for
  /// RenamedFunction, empty otherwise.
  std::string detail;

  bool operator==(const Fix&) const = default;
};

/// "StrippedKeyword(code)", "BalancedParens", ...
std::string to_string(const Fix& fix);
std::optional<Fix> parse_fix(std::string_view text);

struct SanitizeOptions {
  /// Stray words dropped when they lead an expression.
  std::vector<std::string> keywords = {"code", "scheme", "lisp", "smt", "smt2"};
};

struct SanitizeResult {
  std::string text;
  std::vector<Fix> fixes;
};

/// Strips markdown fences (and their language hints), drops leading stray
/// keywords in front of an expression, then balances parentheses. Throws
/// UnrepairableError when the parentheses cannot be fixed by suffix edits.
SanitizeResult sanitize(std::string_view text, const SanitizeOptions& options = {});

/// An invariant as it appears in a response, before normalization against a
/// problem. `name` and `params` are absent for bare bodies; `params` is also
/// absent when the response elided the parameter list as `(...)`.
struct ParsedInvariant {
  std::optional<std::string> name;
  std::optional<std::vector<SortedVar>> params;
  SExpr body;
};

class NormalizationError : public Error {
 public:
  enum class Kind { ParamMismatch, UnknownFreeVariable };

  NormalizationError(Kind kind, std::string subject, const std::string& message)
      : Error(message), kind_(kind), subject_(std::move(subject)) {}

  Kind kind() const { return kind_; }
  const std::string& subject() const { return subject_; }

 private:
  Kind kind_;
  std::string subject_;
};

/// Binds a parsed invariant to the problem's signature: a differing function
/// name is replaced by problem.inv_name (RenamedFunction), missing params are
/// adopted from the problem (ReparamedSignature). Present params must match
/// inv_params exactly, in order; every free symbol of the body must be one of
/// them.
CandidateInvariant normalize_signature(const ParsedInvariant& parsed,
                                       const SynthesisProblem& problem,
                                       std::vector<Fix>* fixes = nullptr);

/// Re-checks an already built candidate against the problem.
CandidateInvariant normalize_signature(const CandidateInvariant& candidate,
                                       const SynthesisProblem& problem);

struct ExtractionFailure {
  enum class Kind {
    NoInvariantFound,
    Unrepairable,
    /// A stray token in front of the expression that sanitation did not remove.
    ExpressionError,
    ParamMismatch,
    UnknownFreeVariable,
  };
  Kind kind;
  std::string detail;

  std::string message() const;
  bool operator==(const ExtractionFailure&) const = default;
};

std::string_view to_string(ExtractionFailure::Kind kind);

struct ExtractionReport {
  std::optional<CandidateInvariant> candidate;
  /// The expression the locator picked, kept even when a later step failed.
  std::optional<ParsedInvariant> located;
  std::vector<Fix> applied_fixes;
  std::optional<ExtractionFailure> failure;
};

/// Sanitizes the response and takes the first S-expression that is a full
/// define-fun, a define-fun missing its keyword and name (`(PARAMS Bool BODY)`),
/// or a bare Bool-valued body; the result is then normalized.
ExtractionReport extract_invariant(std::string_view response, const SynthesisProblem& problem,
                                   const SanitizeOptions& options = {});

}  // namespace loopinv
