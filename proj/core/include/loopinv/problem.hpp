#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "loopinv/sexpr.hpp"

namespace loopinv {

enum class Sort { Int, Bool };

std::string_view to_string(Sort sort);
std::optional<Sort> parse_sort(std::string_view token);

/// A program state variable. Names never carry the `!` suffix; primed
/// counterparts are derived with primed().
struct SortedVar {
  std::string name;
  Sort sort = Sort::Int;

  bool operator==(const SortedVar&) const = default;
};

/// `name!`, the post-iteration copy of a state variable.
std::string primed(const SortedVar& v);
std::string primed(std::string_view name);

/// A Bool-valued define-fun (pre, trans, post, or invariant body).
struct FunctionDef {
  std::string name;
  std::vector<SortedVar> params;
  SExpr body;

  bool operator==(const FunctionDef&) const = default;
};

enum class Role { PreF, TransF, PostF };
std::string_view to_string(Role role);

struct SynthesisProblem {
  std::string id;
  std::string logic;
  std::string inv_name;
  std::vector<SortedVar> inv_params;
  FunctionDef pre_f;
  FunctionDef trans_f;
  FunctionDef post_f;

  const FunctionDef& function(Role role) const;
  /// inv_params followed by their primed copies.
  std::vector<SortedVar> state_and_next() const;

  bool operator==(const SynthesisProblem&) const = default;
};

struct Provenance {
  std::string strategy;
  int sample_index = -1;
  std::string parent_id;
  std::string response_id;

  bool operator==(const Provenance&) const = default;
};

struct CandidateInvariant {
  SExpr body;
  std::vector<SortedVar> params;
  Provenance provenance;

  bool operator==(const CandidateInvariant&) const = default;
};

class ProblemError : public Error {
 public:
  enum class Kind {
    MissingDirective,
    RoleArityMismatch,
    UnknownFreeVariable,
    DuplicateDefinition,
    UnsupportedSort,
    Malformed,
  };

  ProblemError(Kind kind, std::string subject, const std::string& message)
      : Error(message), kind_(kind), subject_(std::move(subject)) {}

  Kind kind() const { return kind_; }
  /// The directive, role, symbol or name the error is about.
  const std::string& subject() const { return subject_; }

 private:
  Kind kind_;
  std::string subject_;
};

/// Loads a SyGuS-Inv problem. Roles are bound through `inv-constraint`, so
/// the three functions may be named arbitrarily. Non-fatal inconsistencies
/// (for example a `declare-primed-var` that disagrees with `synth-inv`) are
/// appended to `warnings` when it is non-null.
SynthesisProblem load_sygus_problem(std::string_view text, std::string id,
                                    std::vector<std::string>* warnings = nullptr);

/// Reads a `.sl` file; the problem id is the file stem.
SynthesisProblem load_problem_file(const std::filesystem::path& path,
                                   std::vector<std::string>* warnings = nullptr);

/// Loads every `.sl` file of a directory, sorted by id.
std::vector<SynthesisProblem> load_problem_dir(const std::filesystem::path& dir);

/// Serializes a problem back to SyGuS-Inv text.
std::string emit_sygus_problem(const SynthesisProblem& problem);

/// Renders `(define-fun name ((v S) ...) Bool body)`.
std::string print_define_fun(std::string_view name, const std::vector<SortedVar>& params,
                             const SExpr& body);
std::string print_define_fun(const FunctionDef& f);
std::string print_params(const std::vector<SortedVar>& params);

/// Simultaneous structural substitution of variable occurrences. Symbols in
/// operator (head) position are never replaced.
SExpr substitute(const SExpr& body, const std::map<std::string, SExpr>& mapping);

/// Variable occurrences of `body`: symbols in argument position, plus head
/// symbols that are not builtin operators. Ordered by first occurrence.
std::vector<std::string> free_symbols(const SExpr& body);

/// The arithmetic and logical operators understood by the evaluator and
/// accepted inside formulas.
bool is_builtin_operator(std::string_view name);

/// Operators whose result is Bool.
bool is_boolean_operator(std::string_view name);

}  // namespace loopinv
