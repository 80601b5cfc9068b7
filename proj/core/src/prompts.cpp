#include "loopinv/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "templates.hpp"

namespace loopinv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using Values = std::map<std::string, std::string, std::less<>>;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string condition_name(Condition c) { return lower(to_string(c)); }

std::string variable_list(const SynthesisProblem& p) {
  std::string out;
  for (const auto& v : p.inv_params) {
    if (!out.empty()) out += ", ";
    out += v.name;
  }
  return out;
}

std::string implication(const SynthesisProblem& p, Condition c) {
  return print_sexpr(condition_formula(p, c));
}

std::string render(std::string_view name, const Values& values) {
  return detail::render_template(name, values);
}

std::string system_text() { return std::string(detail::template_text("system")); }

std::string problem_section(const SynthesisProblem& p) {
  return render("problem", {{"problem", render_problem(p)}});
}

std::string output_stanza(const SynthesisProblem& p) {
  return render("output", {{"inv_name", p.inv_name}, {"params", print_params(p.inv_params)}});
}

std::string instruction_part(const SynthesisProblem& p) {
  return render("instruction", {{"inv_name", p.inv_name},
                                {"pre_name", p.pre_f.name},
                                {"trans_name", p.trans_f.name},
                                {"post_name", p.post_f.name},
                                {"initiation", implication(p, Condition::Initiation)},
                                {"consecution", implication(p, Condition::Consecution)},
                                {"safety", implication(p, Condition::Safety)},
                                {"variables", variable_list(p)},
                                {"params", print_params(p.inv_params)}});
}

Prompt make_prompt(PromptKind kind, std::string user_text) {
  return Prompt(std::move(kind), {{MessageRole::System, system_text()},
                                  {MessageRole::User, std::move(user_text)}});
}

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n";
    out += b;
  }
  return out;
}

std::string status_line(const FewShotExample& ex) {
  if (ex.valid()) return "valid";
  std::string s = "invalid, it violates the " + condition_name(*ex.violated) + " condition";
  if (ex.failure_reason) s += "\nReason: " + *ex.failure_reason;
  return s;
}

// Consecutive examples with the same problem text form one group.
std::vector<std::pair<std::size_t, std::size_t>> example_groups(
    const std::vector<FewShotExample>& examples) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (groups.empty() || examples[groups.back().first].problem_text != examples[i].problem_text)
      groups.push_back({i, i + 1});
    else
      groups.back().second = i + 1;
  }
  return groups;
}

void check_examples(const std::vector<FewShotExample>& examples, ExampleType type) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (ex.valid() == ex.failure_reason.has_value())
      throw TypeMismatch(i, "a failure reason belongs to exactly the invalid examples");
    if (type == ExampleType::Positive && !ex.valid())
      throw TypeMismatch(i, "positive examples must carry valid invariants");
    if (type == ExampleType::Negative && ex.valid())
      throw TypeMismatch(i, "negative examples must carry invalid invariants");
  }
  if (type != ExampleType::Mixed) return;
  for (auto [begin, end] : example_groups(examples)) {
    bool has_valid = false, has_invalid = false;
    for (std::size_t i = begin; i < end; ++i) (examples[i].valid() ? has_valid : has_invalid) = true;
    if (!has_valid || !has_invalid)
      throw TypeMismatch(begin, "mixed examples need a valid and an invalid invariant per problem");
  }
}

std::string render_examples(const std::vector<FewShotExample>& examples) {
  std::vector<std::string> blocks;
  std::size_t index = 1;
  for (auto [begin, end] : example_groups(examples)) {
    std::string block = render("example", {{"index", std::to_string(index++)},
                                           {"problem", examples[begin].problem_text}});
    for (std::size_t i = begin; i < end; ++i)
      block += render("example_invariant",
                      {{"invariant", examples[i].invariant_text}, {"status", status_line(examples[i])}});
    blocks.push_back(std::move(block));
  }
  return join_blocks(blocks);
}

}  // namespace

std::string_view to_string(MessageRole r) { return r == MessageRole::System ? "system" : "user"; }

std::string_view to_string(ExampleType t) {
  switch (t) {
    case ExampleType::Positive:
      return "positive";
    case ExampleType::Negative:
      return "negative";
    case ExampleType::Mixed:
      return "mixed";
  }
  return "?";
}

std::optional<ExampleType> parse_example_type(std::string_view name) {
  for (auto t : {ExampleType::Positive, ExampleType::Negative, ExampleType::Mixed})
    if (to_string(t) == name) return t;
  return std::nullopt;
}

std::string to_string(const PromptKind& kind) {
  return std::visit(
      overloaded{
          [](const prompt_kind::ZeroShot&) { return std::string("zero-shot"); },
          [](const prompt_kind::Instruction&) { return std::string("instruction"); },
          [](const prompt_kind::Partial& k) { return "partial(" + condition_name(k.condition) + ")"; },
          [](const prompt_kind::Combine&) { return std::string("combine"); },
          [](const prompt_kind::FewShot& k) {
            return "few-shot(" + std::string(to_string(k.example_type)) + "," +
                   std::to_string(k.n) + ")";
          },
          [](const prompt_kind::Integrated& k) {
            return "integrated(" + std::string(to_string(k.example_type)) + "," +
                   std::to_string(k.n) + ")";
          },
          [](const prompt_kind::RepairCause&) { return std::string("repair-cause"); },
          [](const prompt_kind::RepairCounterexample&) {
            return std::string("repair-counterexample");
          },
      },
      kind);
}

std::string_view to_string(RepairDetail d) {
  return d == RepairDetail::CauseOnly ? "cause" : "counterexample";
}

std::optional<RepairDetail> parse_repair_detail(std::string_view name) {
  if (name == "cause") return RepairDetail::CauseOnly;
  if (name == "counterexample") return RepairDetail::WithCounterexample;
  return std::nullopt;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

Prompt::Prompt(PromptKind kind, std::vector<Message> messages)
    : kind_(std::move(kind)), messages_(std::move(messages)) {
  if (std::none_of(messages_.begin(), messages_.end(),
                   [](const Message& m) { return m.role == MessageRole::User; }))
    throw Error("a prompt needs at least one user message");
  recompute();
}

void Prompt::add_message(Message m) {
  messages_.push_back(std::move(m));
  recompute();
}

void Prompt::append_text(std::string_view text) {
  for (auto it = messages_.rbegin(); it != messages_.rend(); ++it) {
    if (it->role == MessageRole::User) {
      it->text.append(text);
      break;
    }
  }
  recompute();
}

std::string Prompt::full_text() const {
  std::vector<std::string> parts;
  for (const auto& m : messages_) parts.push_back(m.text);
  return join_blocks(parts);
}

void Prompt::recompute() {
  std::size_t chars = 0;
  for (const auto& m : messages_) chars += m.text.size();
  token_estimate_ = (chars + 3) / 4;
}

std::size_t estimate_tokens(const Prompt& prompt) { return prompt.token_estimate(); }

nlohmann::json to_json(const Prompt& prompt) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : prompt.messages())
    messages.push_back({{"role", to_string(m.role)}, {"text", m.text}});
  return {{"kind", to_string(prompt.kind())},
          {"messages", std::move(messages)},
          {"token_estimate", prompt.token_estimate()}};
}

void check_token_limit(const Prompt& prompt, std::size_t limit) {
  if (prompt.token_estimate() > limit) throw TokenLimitExceeded(prompt.token_estimate(), limit);
}

FewShotExample make_example(const CorpusEntry& entry, const CorpusSolution& solution) {
  FewShotExample ex;
  ex.problem_text = render_problem(entry.problem);
  ex.invariant_text =
      print_define_fun(entry.problem.inv_name, solution.invariant.params, solution.invariant.body);
  ex.violated = solution.violated;
  if (!solution.valid())
    ex.failure_reason = solution.reason.empty()
                            ? "the " + condition_name(*solution.violated) + " condition does not hold"
                            : solution.reason;
  return ex;
}

std::vector<FewShotExample> select_examples(const std::vector<RankedEntry>& ranked,
                                            ExampleType type) {
  std::vector<FewShotExample> out;
  for (const auto& r : ranked) {
    const auto& sols = r.entry->solutions;
    auto valid = std::find_if(sols.begin(), sols.end(), [](const CorpusSolution& s) { return s.valid(); });
    auto invalid =
        std::find_if(sols.begin(), sols.end(), [](const CorpusSolution& s) { return !s.valid(); });
    switch (type) {
      case ExampleType::Positive:
        if (valid != sols.end()) out.push_back(make_example(*r.entry, *valid));
        break;
      case ExampleType::Negative:
        if (invalid != sols.end()) out.push_back(make_example(*r.entry, *invalid));
        break;
      case ExampleType::Mixed:
        if (valid != sols.end() && invalid != sols.end()) {
          out.push_back(make_example(*r.entry, *valid));
          out.push_back(make_example(*r.entry, *invalid));
        }
        break;
    }
  }
  return out;
}

std::string render_problem(const SynthesisProblem& p) {
  std::string out = "(synth-inv " + p.inv_name + " " + print_params(p.inv_params) + ")\n";
  out += print_define_fun(p.pre_f) + "\n";
  out += print_define_fun(p.trans_f) + "\n";
  out += print_define_fun(p.post_f) + "\n";
  out += "(inv-constraint " + p.inv_name + " " + p.pre_f.name + " " + p.trans_f.name + " " +
         p.post_f.name + ")\n";
  return out;
}

Prompt build_zero_shot_prompt(const SynthesisProblem& p) {
  std::string text = render("zero_shot", {{"inv_name", p.inv_name}, {"variables", variable_list(p)}});
  text += "\n" + problem_section(p) + "\n" + output_stanza(p);
  return make_prompt(prompt_kind::ZeroShot{}, std::move(text));
}

Prompt build_instruction_prompt(const SynthesisProblem& p) {
  std::string text = instruction_part(p) + "\n" + problem_section(p) + "\n" + output_stanza(p);
  return make_prompt(prompt_kind::Instruction{}, std::move(text));
}

Prompt build_partial_prompt(const SynthesisProblem& p, Condition c) {
  std::string declarations;
  for (const auto& v : p.inv_params)
    declarations += "(declare-var " + v.name + " " + std::string(to_string(v.sort)) + ")\n";
  if (c == Condition::Consecution)
    for (const auto& v : p.inv_params)
      declarations += "(declare-var " + primed(v) + " " + std::string(to_string(v.sort)) + ")\n";

  const FunctionDef& used = c == Condition::Initiation    ? p.pre_f
                            : c == Condition::Consecution ? p.trans_f
                                                          : p.post_f;
  std::string text = render("partial", {{"inv_name", p.inv_name},
                                        {"variables", variable_list(p)},
                                        {"params", print_params(p.inv_params)},
                                        {"condition", condition_name(c)},
                                        {"implication", implication(p, c)},
                                        {"declarations", declarations},
                                        {"definitions", print_define_fun(used) + "\n"}});
  text += "\n" + output_stanza(p);
  return make_prompt(prompt_kind::Partial{c}, std::move(text));
}

Prompt build_combine_prompt(const SynthesisProblem& p,
                            const std::vector<ConditionalAttempt>& attempts) {
  if (attempts.empty()) throw Error("combine prompt needs at least one attempt");
  std::vector<std::string> sections;
  for (Condition c : kAllConditions) {
    std::string section = std::string(to_string(c)) + " attempts:\n";
    std::size_t n = 0;
    for (const auto& a : attempts) {
      if (a.condition != c) continue;
      section += std::to_string(++n) + ". " +
                 (a.passed ? std::string("PASS") : "FAIL(" + condition_name(c) + ")") + " " +
                 a.invariant_text + "\n";
    }
    if (n == 0) section += "(none)\n";
    sections.push_back(std::move(section));
  }
  std::string text = problem_section(p) + "\n" + render("combine", {{"sections", join_blocks(sections)}}) +
                     "\n" + output_stanza(p);
  return make_prompt(prompt_kind::Combine{}, std::move(text));
}

Prompt build_fewshot_prompt(const SynthesisProblem& p, const std::vector<FewShotExample>& examples,
                            ExampleType type) {
  if (examples.empty()) throw TypeMismatch(0, "a few-shot prompt needs at least one example");
  check_examples(examples, type);
  std::string text = render("fewshot", {{"examples", render_examples(examples)},
                                        {"inv_name", p.inv_name},
                                        {"variables", variable_list(p)}});
  text += "\n" + problem_section(p) + "\n" + output_stanza(p);
  return make_prompt(prompt_kind::FewShot{type, example_groups(examples).size()}, std::move(text));
}

Prompt build_integrated_prompt(const SynthesisProblem& p,
                               const std::vector<FewShotExample>& examples, ExampleType type) {
  check_examples(examples, type);
  std::string text = instruction_part(p) + "\n" + problem_section(p) + "\n" + output_stanza(p) +
                     "\n" + render("examples_section", {{"examples", render_examples(examples)}});
  return make_prompt(prompt_kind::Integrated{type, example_groups(examples).size()},
                     std::move(text));
}

Prompt build_repair_prompt(const SynthesisProblem& p, const CandidateInvariant& failed,
                           const VerificationOutcome& outcome, RepairDetail detail) {
  std::string cause, details, counterexample;
  if (const auto* v = std::get_if<verdict::Violated>(&outcome)) {
    cause = "the invariant does not satisfy the " + condition_name(v->condition) + " condition.";
    details = "the verifier failed to satisfy the condition " + implication(p, v->condition);
    if (detail == RepairDetail::WithCounterexample) {
      std::string lines;
      for (const auto& [name, value] : v->model.assignments)
        lines += name + " = " + to_string(value) + "\n";
      counterexample = render("repair_counterexample",
                              {{"implication", implication(p, v->condition)}, {"assignments", lines}});
    }
  } else if (const auto* bad = std::get_if<verdict::IllFormed>(&outcome)) {
    cause = "the invariant is not well formed.";
    details = bad->reason;
  } else {
    throw InapplicableOutcome("repair needs a violated or ill-formed invariant, got " +
                              describe(outcome));
  }

  const std::string invariant = print_define_fun(p.inv_name, failed.params, failed.body);
  std::string text = problem_section(p) + "\n" +
                     render("repair", {{"invariant", invariant}, {"cause", cause}, {"details", details}});
  if (!counterexample.empty()) text += "\n" + counterexample;
  text += "\n" + std::string(detail::template_text("repair_request")) + "\n" + output_stanza(p);
  PromptKind kind = detail == RepairDetail::CauseOnly ? PromptKind(prompt_kind::RepairCause{})
                                                      : PromptKind(prompt_kind::RepairCounterexample{});
  return make_prompt(std::move(kind), std::move(text));
}

}  // namespace loopinv
