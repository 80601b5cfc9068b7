#include "loopinv/extractor.hpp"

#include <algorithm>
#include <cctype>

namespace loopinv {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_hint_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '+' || c == '-';
}

struct FenceBlock {
  std::size_t begin;
  std::size_t end;
};

// Content ranges of ``` fenced blocks, language hint excluded. An unclosed
// fence runs to the end of the text.
std::vector<FenceBlock> fenced_blocks(std::string_view text) {
  std::vector<FenceBlock> blocks;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t p = open + 3;
    while (p < text.size() && is_hint_char(text[p])) ++p;
    std::size_t eol = text.find('\n', p);
    std::string_view rest_of_line =
        text.substr(p, (eol == std::string_view::npos ? text.size() : eol) - p);
    if (trim(rest_of_line).empty() && eol != std::string_view::npos) p = eol + 1;
    std::size_t close = text.find("```", p);
    if (close == std::string_view::npos) {
      blocks.push_back({p, text.size()});
      break;
    }
    blocks.push_back({p, close});
    pos = close + 3;
  }
  return blocks;
}

std::string strip_keywords(std::string_view text, const SanitizeOptions& options,
                           std::vector<Fix>& fixes) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, (eol == std::string_view::npos ? text.size() : eol) - pos);
    std::size_t indent = 0;
    while (indent < line.size() && is_space(line[indent])) ++indent;
    std::string_view body = line.substr(indent);
    bool changed = true;
    while (changed) {
      changed = false;
      std::size_t end = 0;
      while (end < body.size() && !is_space(body[end]) && body[end] != '(') ++end;
      if (end == 0) break;
      std::string word = lower(body.substr(0, end));
      if (std::find(options.keywords.begin(), options.keywords.end(), word) ==
          options.keywords.end())
        break;
      std::string_view after = body.substr(end);
      std::size_t skip = 0;
      while (skip < after.size() && is_space(after[skip])) ++skip;
      std::string_view next = after.substr(skip);
      // Look past any further keywords ("scheme code (...)").
      std::string_view rest = next;
      while (true) {
        std::size_t w = 0;
        while (w < rest.size() && !is_space(rest[w]) && rest[w] != '(') ++w;
        if (w == 0 || std::find(options.keywords.begin(), options.keywords.end(),
                                lower(rest.substr(0, w))) == options.keywords.end())
          break;
        rest = trim(rest.substr(w));
      }
      bool precedes_expr = !rest.empty() && rest.front() == '(';
      if (!precedes_expr && rest.substr(0, 4) == "Bool") {
        std::string_view tail = trim(rest.substr(4));
        precedes_expr = !tail.empty() && tail.front() == '(';
      }
      if (!precedes_expr) break;
      fixes.push_back({FixKind::StrippedKeyword, std::string(body.substr(0, end))});
      body = next;
      changed = true;
    }
    out.append(line.substr(0, indent));
    out.append(body);
    if (eol == std::string_view::npos) break;
    out.push_back('\n');
    pos = eol + 1;
  }
  return out;
}

std::optional<std::vector<SortedVar>> parse_params(const SExpr& list) {
  if (!list.is_list()) return std::nullopt;
  std::vector<SortedVar> out;
  for (const auto& entry : list.children()) {
    if (!entry.is_list() || entry.children().size() != 2 || !entry.children()[0].is_symbol() ||
        !entry.children()[1].is_symbol())
      return std::nullopt;
    auto sort = parse_sort(entry.children()[1].symbol_name());
    if (!sort) return std::nullopt;
    out.push_back({entry.children()[0].symbol_name(), *sort});
  }
  return out;
}

bool is_elided_params(const SExpr& e) {
  return e.is_list() && e.children().size() == 1 && e.children()[0].is_symbol("...");
}

bool looks_like_param_list(const SExpr& e) {
  if (!e.is_list()) return false;
  return std::all_of(e.children().begin(), e.children().end(), [](const SExpr& p) {
    return p.is_list() && p.children().size() == 2 && p.children()[0].is_symbol();
  });
}

struct Located {
  ParsedInvariant parsed;
  std::optional<ExtractionFailure> failure;
};

std::optional<Located> classify(const SExpr& e) {
  if (!e.is_list()) return std::nullopt;
  const auto& kids = e.children();
  if (e.head() == "define-fun" && kids.size() == 5 && kids[1].is_symbol() &&
      kids[3].is_symbol("Bool")) {
    Located loc{{kids[1].symbol_name(), std::nullopt, kids[4]}, std::nullopt};
    if (is_elided_params(kids[2])) return loc;
    loc.parsed.params = parse_params(kids[2]);
    if (!loc.parsed.params)
      loc.failure = ExtractionFailure{ExtractionFailure::Kind::ParamMismatch,
                                      "unreadable parameter list " + print_sexpr(kids[2])};
    return loc;
  }
  if (kids.size() == 3 && kids[1].is_symbol("Bool") &&
      (is_elided_params(kids[0]) || looks_like_param_list(kids[0]))) {
    Located loc{{std::nullopt, std::nullopt, kids[2]}, std::nullopt};
    if (is_elided_params(kids[0])) return loc;
    loc.parsed.params = parse_params(kids[0]);
    if (!loc.parsed.params)
      loc.failure = ExtractionFailure{ExtractionFailure::Kind::ParamMismatch,
                                      "unreadable parameter list " + print_sexpr(kids[0])};
    return loc;
  }
  if (is_boolean_operator(e.head())) return Located{{std::nullopt, std::nullopt, e}, std::nullopt};
  return std::nullopt;
}

// A single word glued in front of the expression on its line, such as the
// `code` of `code Bool (and ...)`.
std::optional<std::string> stray_prefix(std::string_view text, std::size_t expr_pos) {
  std::size_t line_start = text.rfind('\n', expr_pos == 0 ? 0 : expr_pos - 1);
  line_start = (line_start == std::string_view::npos || expr_pos == 0) ? 0 : line_start + 1;
  std::string_view prefix = trim(text.substr(line_start, expr_pos - line_start));
  if (prefix.size() >= 4 && prefix.substr(prefix.size() - 4) == "Bool" &&
      (prefix.size() == 4 || is_space(prefix[prefix.size() - 5])))
    prefix = trim(prefix.substr(0, prefix.size() - 4));
  if (prefix.empty() || prefix.back() == ':') return std::nullopt;
  if (std::any_of(prefix.begin(), prefix.end(), is_space)) return std::nullopt;
  if (std::none_of(prefix.begin(), prefix.end(),
                   [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }))
    return std::nullopt;
  return std::string(prefix);
}

}  // namespace

std::string to_string(const Fix& fix) {
  switch (fix.kind) {
    case FixKind::StrippedFence:
      return "StrippedFence";
    case FixKind::StrippedKeyword:
      return "StrippedKeyword(" + fix.detail + ")";
    case FixKind::BalancedParens:
      return "BalancedParens";
    case FixKind::RenamedFunction:
      return "RenamedFunction(" + fix.detail + ")";
    case FixKind::ReparamedSignature:
      return "ReparamedSignature";
  }
  return "?";
}

std::optional<Fix> parse_fix(std::string_view text) {
  auto with_detail = [&](std::string_view prefix, FixKind kind) -> std::optional<Fix> {
    if (text.substr(0, prefix.size()) == prefix && text.back() == ')')
      return Fix{kind, std::string(text.substr(prefix.size(), text.size() - prefix.size() - 1))};
    return std::nullopt;
  };
  if (text == "StrippedFence") return Fix{FixKind::StrippedFence, {}};
  if (text == "BalancedParens") return Fix{FixKind::BalancedParens, {}};
  if (text == "ReparamedSignature") return Fix{FixKind::ReparamedSignature, {}};
  if (auto f = with_detail("StrippedKeyword(", FixKind::StrippedKeyword)) return f;
  if (auto f = with_detail("RenamedFunction(", FixKind::RenamedFunction)) return f;
  return std::nullopt;
}

std::string_view to_string(ExtractionFailure::Kind kind) {
  switch (kind) {
    case ExtractionFailure::Kind::NoInvariantFound:
      return "NoInvariantFound";
    case ExtractionFailure::Kind::Unrepairable:
      return "Unrepairable";
    case ExtractionFailure::Kind::ExpressionError:
      return "ExpressionError";
    case ExtractionFailure::Kind::ParamMismatch:
      return "ParamMismatch";
    case ExtractionFailure::Kind::UnknownFreeVariable:
      return "UnknownFreeVariable";
  }
  return "?";
}

std::string ExtractionFailure::message() const {
  switch (kind) {
    case Kind::NoInvariantFound:
      return "no invariant found in response";
    case Kind::UnknownFreeVariable:
      return "unknown free variable " + detail;
    default:
      return std::string(to_string(kind)) + ": " + detail;
  }
}

SanitizeResult sanitize(std::string_view text, const SanitizeOptions& options) {
  SanitizeResult result;
  std::string work(text);

  auto blocks = fenced_blocks(work);
  if (!blocks.empty()) {
    auto chosen = std::find_if(blocks.begin(), blocks.end(), [&](const FenceBlock& b) {
      return work.substr(b.begin, b.end - b.begin).find('(') != std::string::npos;
    });
    if (chosen == blocks.end()) chosen = blocks.begin();
    work = work.substr(chosen->begin, chosen->end - chosen->begin);
    result.fixes.push_back({FixKind::StrippedFence, {}});
  }
  if (work.find('`') != std::string::npos) {
    work.erase(std::remove(work.begin(), work.end(), '`'), work.end());
    if (blocks.empty()) result.fixes.push_back({FixKind::StrippedFence, {}});
  }

  work = strip_keywords(work, options, result.fixes);

  if (!parentheses_balanced(work)) {
    work = balance_parentheses(work);
    result.fixes.push_back({FixKind::BalancedParens, {}});
  }
  result.text = std::move(work);
  return result;
}

CandidateInvariant normalize_signature(const ParsedInvariant& parsed,
                                       const SynthesisProblem& problem, std::vector<Fix>* fixes) {
  auto note = [&](Fix f) {
    if (fixes != nullptr) fixes->push_back(std::move(f));
  };
  if (parsed.name && *parsed.name != problem.inv_name)
    note({FixKind::RenamedFunction, *parsed.name});

  CandidateInvariant out;
  out.body = parsed.body;
  if (parsed.params) {
    if (*parsed.params != problem.inv_params)
      throw NormalizationError(NormalizationError::Kind::ParamMismatch, print_params(*parsed.params),
                               "parameter mismatch: expected " + print_params(problem.inv_params) +
                                   ", got " + print_params(*parsed.params));
  } else {
    note({FixKind::ReparamedSignature, {}});
  }
  out.params = problem.inv_params;
  return normalize_signature(out, problem);
}

CandidateInvariant normalize_signature(const CandidateInvariant& candidate,
                                       const SynthesisProblem& problem) {
  if (candidate.params != problem.inv_params)
    throw NormalizationError(NormalizationError::Kind::ParamMismatch,
                             print_params(candidate.params),
                             "parameter mismatch: expected " + print_params(problem.inv_params) +
                                 ", got " + print_params(candidate.params));
  for (const auto& sym : free_symbols(candidate.body)) {
    bool known = std::any_of(problem.inv_params.begin(), problem.inv_params.end(),
                             [&](const SortedVar& v) { return v.name == sym; });
    if (!known)
      throw NormalizationError(NormalizationError::Kind::UnknownFreeVariable, sym,
                               "unknown free variable " + sym);
  }
  return candidate;
}

ExtractionReport extract_invariant(std::string_view response, const SynthesisProblem& problem,
                                   const SanitizeOptions& options) {
  ExtractionReport report;
  auto fail = [&](ExtractionFailure::Kind kind, std::string detail) {
    report.candidate.reset();
    report.failure = ExtractionFailure{kind, std::move(detail)};
    return report;
  };

  SanitizeResult clean;
  try {
    clean = sanitize(response, options);
  } catch (const UnrepairableError& e) {
    return fail(ExtractionFailure::Kind::Unrepairable, e.what());
  }
  report.applied_fixes = clean.fixes;
  const std::string& text = clean.text;

  std::optional<Located> found;
  std::size_t found_at = 0;
  for (std::size_t p = text.find('('); p != std::string::npos; p = text.find('(', p + 1)) {
    std::size_t cursor = p;
    SExpr expr;
    try {
      expr = parse_one(text, cursor);
    } catch (const ParseError&) {
      continue;
    }
    if ((found = classify(expr))) {
      found_at = p;
      break;
    }
  }
  if (!found) {
    std::string_view whole = trim(text);
    if (whole.substr(0, 4) == "Bool") whole = trim(whole.substr(4));
    if (whole == "true" || whole == "false") {
      found = Located{{std::nullopt, std::nullopt, SExpr::boolean(whole == "true")}, std::nullopt};
      found_at = text.find(whole);
    }
  }
  if (!found) return fail(ExtractionFailure::Kind::NoInvariantFound, {});
  report.located = found->parsed;
  if (auto stray = stray_prefix(text, found_at))
    return fail(ExtractionFailure::Kind::ExpressionError,
                "stray token '" + *stray + "' before the invariant expression");
  if (found->failure) return fail(found->failure->kind, found->failure->detail);

  try {
    report.candidate = normalize_signature(found->parsed, problem, &report.applied_fixes);
  } catch (const NormalizationError& e) {
    return fail(e.kind() == NormalizationError::Kind::ParamMismatch
                    ? ExtractionFailure::Kind::ParamMismatch
                    : ExtractionFailure::Kind::UnknownFreeVariable,
                e.kind() == NormalizationError::Kind::ParamMismatch ? e.what() : e.subject());
  }
  return report;
}

}  // namespace loopinv
