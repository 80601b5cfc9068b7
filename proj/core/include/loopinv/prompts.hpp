#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "loopinv/problem.hpp"
#include "loopinv/retrieval.hpp"
#include "loopinv/verifier.hpp"

namespace loopinv {

enum class MessageRole { System, User };
std::string_view to_string(MessageRole r);

struct Message {
  MessageRole role = MessageRole::User;
  std::string text;

  bool operator==(const Message&) const = default;
};

enum class ExampleType { Positive, Negative, Mixed };
std::string_view to_string(ExampleType t);
std::optional<ExampleType> parse_example_type(std::string_view name);

namespace prompt_kind {
struct ZeroShot {
  bool operator==(const ZeroShot&) const = default;
};
struct Instruction {
  bool operator==(const Instruction&) const = default;
};
struct Partial {
  Condition condition;
  bool operator==(const Partial&) const = default;
};
struct Combine {
  bool operator==(const Combine&) const = default;
};
struct FewShot {
  ExampleType example_type;
  std::size_t n;
  bool operator==(const FewShot&) const = default;
};
struct Integrated {
  ExampleType example_type;
  std::size_t n;
  bool operator==(const Integrated&) const = default;
};
struct RepairCause {
  bool operator==(const RepairCause&) const = default;
};
struct RepairCounterexample {
  bool operator==(const RepairCounterexample&) const = default;
};
}  // namespace prompt_kind

using PromptKind =
    std::variant<prompt_kind::ZeroShot, prompt_kind::Instruction, prompt_kind::Partial,
                 prompt_kind::Combine, prompt_kind::FewShot, prompt_kind::Integrated,
                 prompt_kind::RepairCause, prompt_kind::RepairCounterexample>;

/// "instruction", "partial(consecution)", "few-shot(positive,2)", ...
std::string to_string(const PromptKind& kind);

/// Rough token count of a text: one token per four characters, rounded up.
std::size_t estimate_tokens(std::string_view text);

class Prompt {
 public:
  Prompt(PromptKind kind, std::vector<Message> messages);

  const PromptKind& kind() const { return kind_; }
  const std::vector<Message>& messages() const { return messages_; }
  std::size_t token_estimate() const { return token_estimate_; }

  void add_message(Message m);
  /// Appends to the last user message.
  void append_text(std::string_view text);
  /// Concatenation of all message texts, separated by blank lines.
  std::string full_text() const;

  bool operator==(const Prompt&) const = default;

 private:
  void recompute();

  PromptKind kind_;
  std::vector<Message> messages_;
  std::size_t token_estimate_ = 0;
};

std::size_t estimate_tokens(const Prompt& prompt);

nlohmann::json to_json(const Prompt& prompt);

inline constexpr std::size_t kDefaultTokenLimit = 8000;

class TokenLimitExceeded : public Error {
 public:
  TokenLimitExceeded(std::size_t estimate, std::size_t limit)
      : Error("prompt needs about " + std::to_string(estimate) + " tokens, limit is " +
              std::to_string(limit)),
        estimate_(estimate),
        limit_(limit) {}

  std::size_t estimate() const { return estimate_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t estimate_;
  std::size_t limit_;
};

/// Throws TokenLimitExceeded when the estimate is above `limit`.
void check_token_limit(const Prompt& prompt, std::size_t limit = kDefaultTokenLimit);

struct FewShotExample {
  /// The example problem's three function definitions.
  std::string problem_text;
  std::string invariant_text;
  /// Absent for a valid invariant.
  std::optional<Condition> violated;
  std::optional<std::string> failure_reason;

  bool valid() const { return !violated.has_value(); }
};

FewShotExample make_example(const CorpusEntry& entry, const CorpusSolution& solution);

/// Examples drawn from ranked corpus entries according to `type`: the first
/// valid solution per entry (Positive), the first violated one (Negative), or
/// one of each (Mixed). Entries without the needed solutions are skipped.
std::vector<FewShotExample> select_examples(const std::vector<RankedEntry>& ranked,
                                            ExampleType type);

class TypeMismatch : public Error {
 public:
  TypeMismatch(std::size_t index, const std::string& why)
      : Error("example " + std::to_string(index) + ": " + why), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class InapplicableOutcome : public Error {
 public:
  using Error::Error;
};

/// Pass/fail result of one conditional invariant.
struct ConditionalAttempt {
  Condition condition;
  std::string invariant_text;
  bool passed = false;
};

enum class RepairDetail { CauseOnly, WithCounterexample };
std::string_view to_string(RepairDetail d);
std::optional<RepairDetail> parse_repair_detail(std::string_view name);

/// The problem as shown to the model: synth-inv plus the three definitions.
std::string render_problem(const SynthesisProblem& problem);

Prompt build_zero_shot_prompt(const SynthesisProblem& problem);
Prompt build_instruction_prompt(const SynthesisProblem& problem);
Prompt build_partial_prompt(const SynthesisProblem& problem, Condition condition);
Prompt build_combine_prompt(const SynthesisProblem& problem,
                            const std::vector<ConditionalAttempt>& attempts);
Prompt build_fewshot_prompt(const SynthesisProblem& problem,
                            const std::vector<FewShotExample>& examples, ExampleType type);
Prompt build_integrated_prompt(const SynthesisProblem& problem,
                               const std::vector<FewShotExample>& examples, ExampleType type);
Prompt build_repair_prompt(const SynthesisProblem& problem, const CandidateInvariant& failed,
                           const VerificationOutcome& outcome, RepairDetail detail);

}  // namespace loopinv
