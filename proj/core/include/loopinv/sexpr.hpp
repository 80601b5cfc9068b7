#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "loopinv/error.hpp"

namespace loopinv {

using BigInt = boost::multiprecision::cpp_int;

/// S-expression value: a symbol, an integer literal, a boolean literal, or a
/// list. Formulas, SyGuS commands, solver scripts and solver models all use it.
class SExpr {
 public:
  struct Symbol {
    std::string name;
    bool operator==(const Symbol&) const = default;
  };
  using List = std::vector<SExpr>;

  SExpr() : node_(List{}) {}

  /// Throws Error if `name` is not a valid symbol token (empty, contains
  /// whitespace, parentheses, `;`, `"` or `|`, or would read back as a literal).
  static SExpr symbol(std::string name);
  static SExpr integer(BigInt value) { return SExpr(Node(std::move(value))); }
  static SExpr boolean(bool value) { return SExpr(Node(value)); }
  static SExpr list(List children = {}) { return SExpr(Node(std::move(children))); }

  bool is_symbol() const { return std::holds_alternative<Symbol>(node_); }
  bool is_int() const { return std::holds_alternative<BigInt>(node_); }
  bool is_bool() const { return std::holds_alternative<bool>(node_); }
  bool is_list() const { return std::holds_alternative<List>(node_); }
  bool is_atom() const { return !is_list(); }

  /// True iff this is the symbol `name`.
  bool is_symbol(std::string_view name) const;

  const std::string& symbol_name() const;
  const BigInt& int_value() const;
  bool bool_value() const;
  const List& children() const;
  List& children();

  /// Head symbol name of a non-empty list whose first element is a symbol,
  /// or an empty view otherwise.
  std::string_view head() const;

  bool operator==(const SExpr& other) const = default;

 private:
  using Node = std::variant<Symbol, BigInt, bool, List>;
  explicit SExpr(Node node) : node_(std::move(node)) {}

  Node node_;
};

class ParseError : public Error {
 public:
  enum class Kind { UnbalancedParentheses, UnexpectedToken };

  ParseError(Kind kind, std::size_t position, const std::string& detail);

  Kind kind() const { return kind_; }
  std::size_t position() const { return position_; }

 private:
  Kind kind_;
  std::size_t position_;
};

class UnrepairableError : public Error {
 public:
  explicit UnrepairableError(const std::string& reason)
      : Error("unrepairable parentheses: " + reason) {}
};

/// Parses every top-level S-expression in `text`. `;` starts a comment that
/// runs to the end of the line. Empty input yields an empty sequence.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Parses exactly one S-expression starting at `pos` (leading whitespace and
/// comments are skipped) and advances `pos` past it.
SExpr parse_one(std::string_view text, std::size_t& pos);

/// Canonical single-line rendering: one space between siblings, parentheses
/// tight against their children, negative integers as `-N`.
std::string print_sexpr(const SExpr& e);

/// Repairs parenthesis imbalance by suffix edits only: trailing unmatched `)`
/// are stripped and missing `)` are appended. Throws UnrepairableError when
/// the imbalance is not confined to the end of the text or the result still
/// does not parse.
std::string balance_parentheses(std::string_view text);

/// True iff no `)` closes below depth zero and the final depth is zero.
/// Comments are ignored.
bool parentheses_balanced(std::string_view text);

}  // namespace loopinv
