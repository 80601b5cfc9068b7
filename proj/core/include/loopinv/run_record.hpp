#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loopinv/verifier.hpp"

namespace loopinv {

enum class Phase { Generate, Conditional, Final, Repair };
std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view name);

enum class OutcomeKind {
  Valid,
  Violated,
  Holds,
  IllFormed,
  Timeout,
  SolverFailure,
  TokenLimit,
  RequestFailed,
  CycleDetected,
  ExtractorFixed,
};
std::string_view to_string(OutcomeKind k);
std::optional<OutcomeKind> parse_outcome_kind(std::string_view name);

/// What happened to one sample, flattened for persistence.
struct RecordOutcome {
  OutcomeKind kind = OutcomeKind::IllFormed;
  /// The violated, holding or timed-out condition.
  std::optional<Condition> condition;
  std::optional<Counterexample> model;
  /// Ill-formedness reason, solver diagnostic, request error, ...
  std::string detail;

  bool operator==(const RecordOutcome&) const = default;
};

RecordOutcome to_record_outcome(const VerificationOutcome& v);
RecordOutcome to_record_outcome(const ConditionVerdict& v);
/// Inverse for Valid/Violated/IllFormed/Timeout/SolverFailure records.
std::optional<VerificationOutcome> to_verification_outcome(const RecordOutcome& o);

struct ExtractionSummary {
  bool ok = false;
  std::vector<std::string> fixes;
  std::optional<std::string> failure;

  bool operator==(const ExtractionSummary&) const = default;
};

struct RunRecord {
  std::string id;
  std::string problem_id;
  std::string strategy;
  Phase phase = Phase::Generate;
  /// The single condition checked in the Conditional phase.
  std::optional<Condition> target_condition;
  /// Position among the samples of one request; -1 for a failed request.
  int sample_index = -1;
  /// Request digest plus sample position.
  std::string response_id;
  std::string response;
  /// The located invariant as a define-fun, when extraction found one.
  std::optional<std::string> invariant;
  ExtractionSummary extraction;
  RecordOutcome outcome;
  /// Repair lineage: the seed record, the record this attempt repairs, and
  /// the attempt number (0 outside repair).
  std::string lineage_id;
  std::string parent_id;
  int attempt = 0;
  double elapsed_ms = 0.0;

  bool operator==(const RunRecord&) const = default;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

class RunLogError : public Error {
 public:
  using Error::Error;
};

/// Reads a JSON Lines run log. A missing file is an empty log. Throws
/// RunLogError naming the line of a malformed record.
std::vector<RunRecord> read_run_log(const std::filesystem::path& path);

/// Append-only writer; safe to share between threads.
class RunLogWriter {
 public:
  explicit RunLogWriter(const std::filesystem::path& path);
  /// Writes nowhere; records are only collected in memory by the caller.
  RunLogWriter() = default;

  void append(const RunRecord& r);
  void append(const std::vector<RunRecord>& rs);

 private:
  std::mutex mutex_;
  std::optional<std::ofstream> out_;
};

}  // namespace loopinv
