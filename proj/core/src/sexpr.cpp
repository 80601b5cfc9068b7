#include "loopinv/sexpr.hpp"

#include <algorithm>
#include <cctype>

namespace loopinv {

namespace {

bool is_delimiter(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';' ||
         c == '"' || c == '|';
}

bool looks_like_integer(std::string_view tok) {
  std::size_t i = 0;
  if (!tok.empty() && tok[0] == '-') i = 1;
  if (i >= tok.size()) return false;
  return std::all_of(tok.begin() + static_cast<std::ptrdiff_t>(i), tok.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

void skip_space_and_comments(std::string_view text, std::size_t& pos) {
  while (pos < text.size()) {
    char c = text[pos];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else if (c == ';') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

SExpr make_atom(std::string_view tok) {
  if (looks_like_integer(tok)) return SExpr::integer(BigInt(std::string(tok)));
  if (tok == "true") return SExpr::boolean(true);
  if (tok == "false") return SExpr::boolean(false);
  return SExpr::symbol(std::string(tok));
}

std::string describe(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::UnbalancedParentheses:
      return "unbalanced parentheses";
    case ParseError::Kind::UnexpectedToken:
      return "unexpected token";
  }
  return "parse error";
}

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

SExpr SExpr::symbol(std::string name) {
  if (name.empty()) throw Error("symbol name must not be empty");
  if (std::any_of(name.begin(), name.end(), is_delimiter))
    throw Error("invalid character in symbol '" + name + "'");
  if (looks_like_integer(name) || name == "true" || name == "false")
    throw Error("symbol '" + name + "' would read back as a literal");
  return SExpr(Node(Symbol{std::move(name)}));
}

bool SExpr::is_symbol(std::string_view name) const {
  const auto* s = std::get_if<Symbol>(&node_);
  return s != nullptr && s->name == name;
}

const std::string& SExpr::symbol_name() const {
  if (const auto* s = std::get_if<Symbol>(&node_)) return s->name;
  throw Error("S-expression is not a symbol: " + print_sexpr(*this));
}

const BigInt& SExpr::int_value() const {
  if (const auto* v = std::get_if<BigInt>(&node_)) return *v;
  throw Error("S-expression is not an integer literal: " + print_sexpr(*this));
}

bool SExpr::bool_value() const {
  if (const auto* v = std::get_if<bool>(&node_)) return *v;
  throw Error("S-expression is not a boolean literal: " + print_sexpr(*this));
}

const SExpr::List& SExpr::children() const {
  if (const auto* l = std::get_if<List>(&node_)) return *l;
  throw Error("S-expression is not a list: " + print_sexpr(*this));
}

SExpr::List& SExpr::children() {
  if (auto* l = std::get_if<List>(&node_)) return *l;
  throw Error("S-expression is not a list: " + print_sexpr(*this));
}

std::string_view SExpr::head() const {
  const auto* l = std::get_if<List>(&node_);
  if (l == nullptr || l->empty() || !l->front().is_symbol()) return {};
  return l->front().symbol_name();
}

ParseError::ParseError(Kind kind, std::size_t position, const std::string& detail)
    : Error(describe(kind) + " at position " + std::to_string(position) +
            (detail.empty() ? std::string() : ": " + detail)),
      kind_(kind),
      position_(position) {}

SExpr parse_one(std::string_view text, std::size_t& pos) {
  skip_space_and_comments(text, pos);
  if (pos >= text.size())
    throw ParseError(ParseError::Kind::UnexpectedToken, pos, "end of input");

  // Iterative so that deeply nested LLM output cannot exhaust the stack.
  std::vector<std::pair<std::size_t, SExpr::List>> open;
  while (true) {
    skip_space_and_comments(text, pos);
    if (pos >= text.size()) {
      std::size_t where = open.empty() ? pos : open.back().first;
      throw ParseError(ParseError::Kind::UnbalancedParentheses, where, "missing ')'");
    }
    char c = text[pos];
    SExpr done;
    if (c == '(') {
      open.emplace_back(pos, SExpr::List{});
      ++pos;
      continue;
    }
    if (c == ')') {
      if (open.empty())
        throw ParseError(ParseError::Kind::UnbalancedParentheses, pos, "unmatched ')'");
      ++pos;
      done = SExpr::list(std::move(open.back().second));
      open.pop_back();
    } else if (c == '"' || c == '|') {
      throw ParseError(ParseError::Kind::UnexpectedToken, pos,
                       std::string("unsupported token starting with ") + c);
    } else {
      std::size_t start = pos;
      while (pos < text.size() && !is_delimiter(text[pos])) ++pos;
      done = make_atom(text.substr(start, pos - start));
    }
    if (open.empty()) return done;
    open.back().second.push_back(std::move(done));
  }
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  std::vector<SExpr> out;
  std::size_t pos = 0;
  while (true) {
    skip_space_and_comments(text, pos);
    if (pos >= text.size()) break;
    if (text[pos] == ')')
      throw ParseError(ParseError::Kind::UnbalancedParentheses, pos, "unmatched ')'");
    out.push_back(parse_one(text, pos));
  }
  return out;
}

namespace {

void print_into(const SExpr& e, std::string& out) {
  if (e.is_symbol()) {
    out += e.symbol_name();
  } else if (e.is_int()) {
    out += e.int_value().str();
  } else if (e.is_bool()) {
    out += e.bool_value() ? "true" : "false";
  } else {
    out += '(';
    bool first = true;
    for (const auto& child : e.children()) {
      if (!first) out += ' ';
      first = false;
      print_into(child, out);
    }
    out += ')';
  }
}

}  // namespace

std::string print_sexpr(const SExpr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

bool parentheses_balanced(std::string_view text) {
  long depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (--depth < 0) return false;
    }
  }
  return depth == 0;
}

std::string balance_parentheses(std::string_view text) {
  long depth = 0;
  bool in_comment_at_end = false;
  std::string_view kept = text;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ';') {
      std::size_t eol = text.find('\n', i);
      if (eol == std::string_view::npos) {
        in_comment_at_end = true;
        break;
      }
      i = eol;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (depth == 0) {
        std::string_view rest = text.substr(i);
        bool only_closers = std::all_of(rest.begin(), rest.end(), [](char r) {
          return r == ')' || std::isspace(static_cast<unsigned char>(r));
        });
        if (!only_closers)
          throw UnrepairableError("unmatched ')' at position " + std::to_string(i) +
                                  " is followed by further content");
        kept = rtrim(text.substr(0, i));
        break;
      }
      --depth;
    }
  }

  std::string out(kept);
  if (depth > 0) {
    out = std::string(rtrim(out));
    if (in_comment_at_end) out += '\n';
    out.append(static_cast<std::size_t>(depth), ')');
  }
  try {
    parse_sexprs(out);
  } catch (const ParseError& e) {
    throw UnrepairableError(e.what());
  }
  return out;
}

}  // namespace loopinv
