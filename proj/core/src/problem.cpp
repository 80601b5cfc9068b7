#include "loopinv/problem.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace loopinv {

namespace {

constexpr std::array kBuiltinOperators = {
    "+", "-", "*", "div", "mod", "abs", "<", "<=", ">", ">=", "=",
    "distinct", "and", "or", "not", "=>", "xor", "ite",
};

constexpr std::array kBooleanOperators = {
    "<", "<=", ">", ">=", "=", "distinct", "and", "or", "not", "=>", "xor",
};

[[noreturn]] void malformed(const std::string& subject, const std::string& msg) {
  throw ProblemError(ProblemError::Kind::Malformed, subject, msg);
}

std::vector<SortedVar> parse_sorted_vars(const SExpr& list, const std::string& where) {
  if (!list.is_list()) malformed(where, where + ": expected a parameter list");
  std::vector<SortedVar> out;
  for (const auto& entry : list.children()) {
    if (!entry.is_list() || entry.children().size() != 2 || !entry.children()[0].is_symbol() ||
        !entry.children()[1].is_symbol())
      malformed(where, where + ": malformed parameter " + print_sexpr(entry));
    const auto& sort_tok = entry.children()[1].symbol_name();
    auto sort = parse_sort(sort_tok);
    if (!sort)
      throw ProblemError(ProblemError::Kind::UnsupportedSort, sort_tok,
                         where + ": unsupported sort " + sort_tok);
    out.push_back({entry.children()[0].symbol_name(), *sort});
  }
  return out;
}

void collect_free(const SExpr& e, bool head_position, std::vector<std::string>& out) {
  if (e.is_symbol()) {
    const auto& name = e.symbol_name();
    if (head_position && is_builtin_operator(name)) return;
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    return;
  }
  if (!e.is_list()) return;
  const auto& kids = e.children();
  for (std::size_t i = 0; i < kids.size(); ++i) collect_free(kids[i], i == 0, out);
}

SExpr substitute_impl(const SExpr& e, bool head_position,
                      const std::map<std::string, SExpr>& mapping) {
  if (e.is_symbol()) {
    if (head_position) return e;
    auto it = mapping.find(e.symbol_name());
    return it == mapping.end() ? e : it->second;
  }
  if (!e.is_list()) return e;
  SExpr::List out;
  out.reserve(e.children().size());
  const auto& kids = e.children();
  for (std::size_t i = 0; i < kids.size(); ++i)
    out.push_back(substitute_impl(kids[i], i == 0, mapping));
  return SExpr::list(std::move(out));
}

void check_closure(const FunctionDef& f, Role role) {
  for (const auto& sym : free_symbols(f.body)) {
    bool known = std::any_of(f.params.begin(), f.params.end(),
                             [&](const SortedVar& v) { return v.name == sym; });
    if (!known)
      throw ProblemError(ProblemError::Kind::UnknownFreeVariable, sym,
                         "unknown free variable " + sym + " in " + std::string(to_string(role)));
  }
}

}  // namespace

std::string_view to_string(Sort sort) { return sort == Sort::Int ? "Int" : "Bool"; }

std::optional<Sort> parse_sort(std::string_view token) {
  if (token == "Int") return Sort::Int;
  if (token == "Bool") return Sort::Bool;
  return std::nullopt;
}

std::string primed(std::string_view name) { return std::string(name) + "!"; }
std::string primed(const SortedVar& v) { return primed(v.name); }

std::string_view to_string(Role role) {
  switch (role) {
    case Role::PreF:
      return "PreF";
    case Role::TransF:
      return "TransF";
    case Role::PostF:
      return "PostF";
  }
  return "?";
}

const FunctionDef& SynthesisProblem::function(Role role) const {
  switch (role) {
    case Role::PreF:
      return pre_f;
    case Role::TransF:
      return trans_f;
    case Role::PostF:
      return post_f;
  }
  return pre_f;
}

std::vector<SortedVar> SynthesisProblem::state_and_next() const {
  std::vector<SortedVar> out = inv_params;
  for (const auto& v : inv_params) out.push_back({primed(v), v.sort});
  return out;
}

bool is_builtin_operator(std::string_view name) {
  return std::find(kBuiltinOperators.begin(), kBuiltinOperators.end(), name) !=
         kBuiltinOperators.end();
}

bool is_boolean_operator(std::string_view name) {
  return std::find(kBooleanOperators.begin(), kBooleanOperators.end(), name) !=
         kBooleanOperators.end();
}

std::vector<std::string> free_symbols(const SExpr& body) {
  std::vector<std::string> out;
  collect_free(body, false, out);
  return out;
}

SExpr substitute(const SExpr& body, const std::map<std::string, SExpr>& mapping) {
  if (mapping.empty()) return body;
  return substitute_impl(body, false, mapping);
}

SynthesisProblem load_sygus_problem(std::string_view text, std::string id,
                                    std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& w) {
    if (warnings != nullptr) warnings->push_back(w);
  };

  std::optional<std::string> logic;
  std::optional<std::pair<std::string, std::vector<SortedVar>>> synth;
  std::optional<std::array<std::string, 4>> constraint;
  std::vector<SortedVar> primed_decls;
  std::map<std::string, FunctionDef> defs;

  for (const auto& cmd : parse_sexprs(text)) {
    auto head = cmd.head();
    const auto& kids = cmd.is_list() ? cmd.children() : SExpr::List{};
    if (head == "set-logic") {
      if (kids.size() != 2 || !kids[1].is_symbol()) malformed("set-logic", "malformed set-logic");
      logic = kids[1].symbol_name();
    } else if (head == "synth-inv") {
      if (kids.size() != 3 || !kids[1].is_symbol()) malformed("synth-inv", "malformed synth-inv");
      if (synth) throw ProblemError(ProblemError::Kind::DuplicateDefinition, kids[1].symbol_name(),
                                    "duplicate synth-inv " + kids[1].symbol_name());
      auto params = parse_sorted_vars(kids[2], "synth-inv");
      for (const auto& p : params)
        if (p.name.find('!') != std::string::npos)
          malformed(p.name, "synth-inv parameter " + p.name + " must not be primed");
      synth.emplace(kids[1].symbol_name(), std::move(params));
    } else if (head == "declare-primed-var") {
      if (kids.size() != 3 || !kids[1].is_symbol() || !kids[2].is_symbol())
        malformed("declare-primed-var", "malformed declare-primed-var");
      auto sort = parse_sort(kids[2].symbol_name());
      if (!sort)
        throw ProblemError(ProblemError::Kind::UnsupportedSort, kids[2].symbol_name(),
                           "unsupported sort " + kids[2].symbol_name());
      primed_decls.push_back({kids[1].symbol_name(), *sort});
    } else if (head == "define-fun") {
      if (kids.size() != 5 || !kids[1].is_symbol() || !kids[3].is_symbol())
        malformed("define-fun", "malformed define-fun " + print_sexpr(cmd));
      const auto& name = kids[1].symbol_name();
      if (defs.count(name) != 0)
        throw ProblemError(ProblemError::Kind::DuplicateDefinition, name,
                           "duplicate definition of " + name);
      if (!kids[3].is_symbol("Bool"))
        malformed(name, "function " + name + " must return Bool");
      defs.emplace(name, FunctionDef{name, parse_sorted_vars(kids[2], name), kids[4]});
    } else if (head == "inv-constraint") {
      if (kids.size() != 5 || !std::all_of(kids.begin() + 1, kids.end(),
                                           [](const SExpr& k) { return k.is_symbol(); }))
        malformed("inv-constraint", "malformed inv-constraint");
      constraint = std::array<std::string, 4>{kids[1].symbol_name(), kids[2].symbol_name(),
                                              kids[3].symbol_name(), kids[4].symbol_name()};
    } else if (head == "check-synth") {
      // nothing to record
    } else {
      warn("ignored command " + print_sexpr(cmd));
    }
  }

  if (!logic)
    throw ProblemError(ProblemError::Kind::MissingDirective, "set-logic", "missing set-logic");
  if (!synth)
    throw ProblemError(ProblemError::Kind::MissingDirective, "synth-inv", "missing synth-inv");
  if (!constraint)
    throw ProblemError(ProblemError::Kind::MissingDirective, "inv-constraint",
                       "missing inv-constraint");
  if ((*constraint)[0] != synth->first)
    throw ProblemError(ProblemError::Kind::MissingDirective, "synth-inv " + (*constraint)[0],
                       "inv-constraint refers to " + (*constraint)[0] +
                           " but synth-inv declares " + synth->first);

  SynthesisProblem p;
  p.id = std::move(id);
  p.logic = *logic;
  p.inv_name = synth->first;
  p.inv_params = synth->second;

  auto bind = [&](const std::string& name, Role role) {
    auto it = defs.find(name);
    if (it == defs.end())
      throw ProblemError(ProblemError::Kind::MissingDirective, "define-fun " + name,
                         "missing define-fun " + name + " for " + std::string(to_string(role)));
    return it->second;
  };
  p.pre_f = bind((*constraint)[1], Role::PreF);
  p.trans_f = bind((*constraint)[2], Role::TransF);
  p.post_f = bind((*constraint)[3], Role::PostF);

  auto arity_error = [](Role role, const std::string& detail) {
    return ProblemError(ProblemError::Kind::RoleArityMismatch, std::string(to_string(role)),
                        std::string(to_string(role)) + " parameters do not match: " + detail);
  };
  if (p.pre_f.params != p.inv_params)
    throw arity_error(Role::PreF, "expected " + print_params(p.inv_params));
  if (p.post_f.params != p.inv_params)
    throw arity_error(Role::PostF, "expected " + print_params(p.inv_params));
  if (p.trans_f.params != p.state_and_next())
    throw arity_error(Role::TransF, "expected " + print_params(p.state_and_next()));

  check_closure(p.pre_f, Role::PreF);
  check_closure(p.trans_f, Role::TransF);
  check_closure(p.post_f, Role::PostF);

  if (!primed_decls.empty()) {
    if (primed_decls != p.inv_params)
      warn("declare-primed-var declarations do not match synth-inv parameters");
  }
  return p;
}

SynthesisProblem load_problem_file(const std::filesystem::path& path,
                                   std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return load_sygus_problem(ss.str(), path.stem().string(), warnings);
  } catch (const ParseError& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<SynthesisProblem> load_problem_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".sl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<SynthesisProblem> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_problem_file(f));
  return out;
}

std::string print_params(const std::vector<SortedVar>& params) {
  std::string out = "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i != 0) out += ' ';
    out += "(" + params[i].name + " " + std::string(to_string(params[i].sort)) + ")";
  }
  return out + ")";
}

std::string print_define_fun(std::string_view name, const std::vector<SortedVar>& params,
                             const SExpr& body) {
  return "(define-fun " + std::string(name) + " " + print_params(params) + " Bool " +
         print_sexpr(body) + ")";
}

std::string print_define_fun(const FunctionDef& f) {
  return print_define_fun(f.name, f.params, f.body);
}

std::string emit_sygus_problem(const SynthesisProblem& p) {
  std::ostringstream out;
  out << "(set-logic " << p.logic << ")\n\n";
  out << "(synth-inv " << p.inv_name << " " << print_params(p.inv_params) << ")\n\n";
  for (const auto& v : p.inv_params)
    out << "(declare-primed-var " << v.name << " " << to_string(v.sort) << ")\n";
  out << "\n";
  out << print_define_fun(p.pre_f) << "\n";
  out << print_define_fun(p.trans_f) << "\n";
  out << print_define_fun(p.post_f) << "\n\n";
  out << "(inv-constraint " << p.inv_name << " " << p.pre_f.name << " " << p.trans_f.name << " "
      << p.post_f.name << ")\n\n";
  out << "(check-synth)\n";
  return out.str();
}

}  // namespace loopinv
