#pragma once

#include <map>
#include <string>
#include <variant>

#include "loopinv/sexpr.hpp"

namespace loopinv {

/// A concrete Int or Bool value.
using Value = std::variant<BigInt, bool>;
using Env = std::map<std::string, Value, std::less<>>;

std::string to_string(const Value& v);

class EvalError : public Error {
 public:
  using Error::Error;
};

/// Evaluates a quantifier-free Int/Bool formula under `env`. Supports
/// + - * div mod abs < <= > >= = distinct and or not => xor ite with SMT-LIB
/// semantics (div/mod are Euclidean). Division by zero, unbound symbols and
/// sort errors raise EvalError.
Value evaluate(const SExpr& e, const Env& env);

/// evaluate() that insists on a Bool result.
bool evaluate_bool(const SExpr& e, const Env& env);

}  // namespace loopinv
