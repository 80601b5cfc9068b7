#include "loopinv/evaluator.hpp"

#include <cstdint>
#include <string_view>

namespace loopinv {

namespace {

const BigInt& as_int(const Value& v, std::string_view op) {
  if (const auto* i = std::get_if<BigInt>(&v)) return *i;
  throw EvalError(std::string(op) + ": expected Int operand");
}

bool as_bool(const Value& v, std::string_view op) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw EvalError(std::string(op) + ": expected Bool operand");
}

// Euclidean division: a = b*q + r with 0 <= r < |b|.
std::pair<BigInt, BigInt> euclid_divmod(const BigInt& a, const BigInt& b) {
  if (b == 0) throw EvalError("division by zero");
  BigInt q = a / b;  // truncates toward zero
  BigInt r = a - b * q;
  if (r < 0) {
    if (b > 0) {
      q -= 1;
      r += b;
    } else {
      q += 1;
      r -= b;
    }
  }
  return {q, r};
}

void require_arity(std::string_view op, std::size_t got, std::size_t min, std::size_t max) {
  if (got < min || got > max)
    throw EvalError("wrong number of arguments for " + std::string(op));
}

}  // namespace

std::string to_string(const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::get<BigInt>(v).str();
}

Value evaluate(const SExpr& e, const Env& env) {
  if (e.is_int()) return e.int_value();
  if (e.is_bool()) return e.bool_value();
  if (e.is_symbol()) {
    auto it = env.find(e.symbol_name());
    if (it == env.end()) throw EvalError("unbound symbol " + e.symbol_name());
    return it->second;
  }

  const auto& kids = e.children();
  if (kids.empty() || !kids[0].is_symbol())
    throw EvalError("cannot evaluate " + print_sexpr(e));
  const std::string& op = kids[0].symbol_name();
  const std::size_t n = kids.size() - 1;
  auto arg = [&](std::size_t i) { return evaluate(kids[i + 1], env); };

  // Short-circuiting connectives first; the solver semantics are total, so
  // short-circuiting only skips errors in irrelevant branches.
  if (op == "and") {
    for (std::size_t i = 0; i < n; ++i)
      if (!as_bool(arg(i), op)) return false;
    return true;
  }
  if (op == "or") {
    for (std::size_t i = 0; i < n; ++i)
      if (as_bool(arg(i), op)) return true;
    return false;
  }
  if (op == "=>") {
    require_arity(op, n, 2, SIZE_MAX);
    // right associative: a => b => c == a => (b => c)
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!as_bool(arg(i), op)) return true;
    return as_bool(arg(n - 1), op);
  }
  if (op == "ite") {
    require_arity(op, n, 3, 3);
    return as_bool(arg(0), op) ? arg(1) : arg(2);
  }
  if (op == "not") {
    require_arity(op, n, 1, 1);
    return !as_bool(arg(0), op);
  }
  if (op == "xor") {
    require_arity(op, n, 2, SIZE_MAX);
    bool acc = as_bool(arg(0), op);
    for (std::size_t i = 1; i < n; ++i) acc = acc != as_bool(arg(i), op);
    return acc;
  }

  std::vector<Value> vals;
  vals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) vals.push_back(arg(i));

  if (op == "=" || op == "distinct") {
    require_arity(op, n, 2, SIZE_MAX);
    for (std::size_t i = 1; i < n; ++i)
      if (vals[i].index() != vals[0].index()) throw EvalError(op + ": mixed sorts");
    if (op == "=") {
      for (std::size_t i = 1; i < n; ++i)
        if (vals[i] != vals[0]) return false;
      return true;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (vals[i] == vals[j]) return false;
    return true;
  }
  if (op == "<" || op == "<=" || op == ">" || op == ">=") {
    require_arity(op, n, 2, SIZE_MAX);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const BigInt& a = as_int(vals[i], op);
      const BigInt& b = as_int(vals[i + 1], op);
      bool ok = op == "<" ? a < b : op == "<=" ? a <= b : op == ">" ? a > b : a >= b;
      if (!ok) return false;
    }
    return true;
  }
  if (op == "+") {
    BigInt acc = 0;
    for (const auto& v : vals) acc += as_int(v, op);
    return acc;
  }
  if (op == "*") {
    BigInt acc = 1;
    for (const auto& v : vals) acc *= as_int(v, op);
    return acc;
  }
  if (op == "-") {
    require_arity(op, n, 1, SIZE_MAX);
    if (n == 1) return BigInt(-as_int(vals[0], op));
    BigInt acc = as_int(vals[0], op);
    for (std::size_t i = 1; i < n; ++i) acc -= as_int(vals[i], op);
    return acc;
  }
  if (op == "div" || op == "mod") {
    require_arity(op, n, 2, SIZE_MAX);
    BigInt acc = as_int(vals[0], op);
    if (op == "mod") {
      require_arity(op, n, 2, 2);
      return euclid_divmod(acc, as_int(vals[1], op)).second;
    }
    for (std::size_t i = 1; i < n; ++i) acc = euclid_divmod(acc, as_int(vals[i], op)).first;
    return acc;
  }
  if (op == "abs") {
    require_arity(op, n, 1, 1);
    const BigInt& a = as_int(vals[0], op);
    return a < 0 ? BigInt(-a) : a;
  }
  throw EvalError("unknown operator " + op);
}

bool evaluate_bool(const SExpr& e, const Env& env) {
  Value v = evaluate(e, env);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw EvalError("expected a Bool result from " + print_sexpr(e));
}

}  // namespace loopinv
