#include "loopinv/run_record.hpp"

#include <array>
#include <cctype>
#include <type_traits>
#include <utility>

namespace loopinv {

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 4> kPhaseNames{{
    {Phase::Generate, "generate"},
    {Phase::Conditional, "conditional"},
    {Phase::Final, "final"},
    {Phase::Repair, "repair"},
}};

constexpr std::array<std::pair<OutcomeKind, std::string_view>, 10> kOutcomeNames{{
    {OutcomeKind::Valid, "valid"},
    {OutcomeKind::Violated, "violated"},
    {OutcomeKind::Holds, "holds"},
    {OutcomeKind::IllFormed, "ill_formed"},
    {OutcomeKind::Timeout, "timeout"},
    {OutcomeKind::SolverFailure, "solver_failure"},
    {OutcomeKind::TokenLimit, "token_limit"},
    {OutcomeKind::RequestFailed, "request_failed"},
    {OutcomeKind::CycleDetected, "cycle_detected"},
    {OutcomeKind::ExtractorFixed, "extractor_fixed"},
}};

template <class E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, v] : table)
    if (k == e) return v;
  return "?";
}

template <class E, std::size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N>& table,
                          std::string_view name) {
  for (const auto& [k, v] : table)
    if (v == name) return k;
  return std::nullopt;
}

nlohmann::json value_json(const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  // Integers are stored as strings so that values beyond 64 bits survive.
  return std::get<BigInt>(v).str();
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return BigInt(j.get<long long>());
  return BigInt(j.get<std::string>());
}

std::string condition_key(Condition c) {
  auto s = std::string(to_string(c));
  s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

std::string_view to_string(Phase p) { return name_of(kPhaseNames, p); }
std::optional<Phase> parse_phase(std::string_view name) { return value_of(kPhaseNames, name); }
std::string_view to_string(OutcomeKind k) { return name_of(kOutcomeNames, k); }
std::optional<OutcomeKind> parse_outcome_kind(std::string_view name) {
  return value_of(kOutcomeNames, name);
}

RecordOutcome to_record_outcome(const VerificationOutcome& v) {
  RecordOutcome o;
  if (std::holds_alternative<verdict::Valid>(v)) {
    o.kind = OutcomeKind::Valid;
  } else if (const auto* x = std::get_if<verdict::Violated>(&v)) {
    o.kind = OutcomeKind::Violated;
    o.condition = x->condition;
    o.model = x->model;
  } else if (const auto* x = std::get_if<verdict::IllFormed>(&v)) {
    o.kind = OutcomeKind::IllFormed;
    o.detail = x->reason;
  } else if (const auto* x = std::get_if<verdict::Timeout>(&v)) {
    o.kind = OutcomeKind::Timeout;
    o.condition = x->condition;
  } else if (const auto* x = std::get_if<verdict::SolverFailure>(&v)) {
    o.kind = OutcomeKind::SolverFailure;
    o.detail = x->diagnostic;
  }
  return o;
}

RecordOutcome to_record_outcome(const ConditionVerdict& v) {
  return std::visit(
      [](const auto& x) -> RecordOutcome {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, verdict::Holds>)
          return {OutcomeKind::Holds, std::nullopt, std::nullopt, {}};
        else
          return to_record_outcome(VerificationOutcome(x));
      },
      v);
}

std::optional<VerificationOutcome> to_verification_outcome(const RecordOutcome& o) {
  switch (o.kind) {
    case OutcomeKind::Valid:
      return verdict::Valid{};
    case OutcomeKind::Violated:
      return verdict::Violated{o.condition.value_or(Condition::Initiation),
                               o.model.value_or(Counterexample{})};
    case OutcomeKind::IllFormed:
      return verdict::IllFormed{o.detail};
    case OutcomeKind::Timeout:
      return verdict::Timeout{o.condition.value_or(Condition::Initiation)};
    case OutcomeKind::SolverFailure:
      return verdict::SolverFailure{o.detail};
    default:
      return std::nullopt;
  }
}

nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json outcome = {{"kind", to_string(r.outcome.kind)}};
  if (r.outcome.condition) outcome["condition"] = condition_key(*r.outcome.condition);
  if (r.outcome.model) {
    nlohmann::json model = nlohmann::json::object();
    for (const auto& [name, value] : r.outcome.model->assignments) model[name] = value_json(value);
    outcome["model"] = std::move(model);
  }
  if (!r.outcome.detail.empty()) outcome["detail"] = r.outcome.detail;

  nlohmann::json extraction = {{"ok", r.extraction.ok}, {"fixes", r.extraction.fixes}};
  if (r.extraction.failure) extraction["failure"] = *r.extraction.failure;

  nlohmann::json j = {{"id", r.id},
                      {"problem", r.problem_id},
                      {"strategy", r.strategy},
                      {"phase", to_string(r.phase)},
                      {"sample", r.sample_index},
                      {"response_id", r.response_id},
                      {"response", r.response},
                      {"extraction", std::move(extraction)},
                      {"outcome", std::move(outcome)},
                      {"elapsed_ms", r.elapsed_ms}};
  if (r.target_condition) j["target_condition"] = condition_key(*r.target_condition);
  if (r.invariant) j["invariant"] = *r.invariant;
  if (r.phase == Phase::Repair) {
    j["lineage"] = r.lineage_id;
    j["parent"] = r.parent_id;
    j["attempt"] = r.attempt;
  }
  return j;
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  auto condition = [](const nlohmann::json& v) {
    auto c = parse_condition(v.get<std::string>());
    if (!c) throw RunLogError("unknown condition " + v.dump());
    return *c;
  };
  RunRecord r;
  r.id = j.at("id").get<std::string>();
  r.problem_id = j.at("problem").get<std::string>();
  r.strategy = j.at("strategy").get<std::string>();
  auto phase = parse_phase(j.at("phase").get<std::string>());
  if (!phase) throw RunLogError("unknown phase " + j.at("phase").dump());
  r.phase = *phase;
  r.sample_index = j.at("sample").get<int>();
  r.response_id = j.value("response_id", "");
  r.response = j.value("response", "");
  if (j.contains("target_condition")) r.target_condition = condition(j.at("target_condition"));
  if (j.contains("invariant")) r.invariant = j.at("invariant").get<std::string>();

  const auto& ex = j.at("extraction");
  r.extraction.ok = ex.at("ok").get<bool>();
  r.extraction.fixes = ex.value("fixes", std::vector<std::string>{});
  if (ex.contains("failure")) r.extraction.failure = ex.at("failure").get<std::string>();

  const auto& out = j.at("outcome");
  auto kind = parse_outcome_kind(out.at("kind").get<std::string>());
  if (!kind) throw RunLogError("unknown outcome " + out.at("kind").dump());
  r.outcome.kind = *kind;
  if (out.contains("condition")) r.outcome.condition = condition(out.at("condition"));
  if (out.contains("model")) {
    Counterexample cex;
    for (const auto& [name, value] : out.at("model").items())
      cex.assignments[name] = value_from_json(value);
    r.outcome.model = std::move(cex);
  }
  r.outcome.detail = out.value("detail", "");
  r.lineage_id = j.value("lineage", "");
  r.parent_id = j.value("parent", "");
  r.attempt = j.value("attempt", 0);
  r.elapsed_ms = j.value("elapsed_ms", 0.0);
  return r;
}

std::vector<RunRecord> read_run_log(const std::filesystem::path& path) {
  std::vector<RunRecord> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(run_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw RunLogError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path) : out_(std::in_place, path, std::ios::app) {
  if (!*out_) throw RunLogError("cannot open run log " + path.string());
}

void RunLogWriter::append(const RunRecord& r) {
  if (!out_) return;
  std::lock_guard lock(mutex_);
  *out_ << to_json(r).dump() << '\n';
  out_->flush();
}

void RunLogWriter::append(const std::vector<RunRecord>& rs) {
  if (!out_) return;
  std::lock_guard lock(mutex_);
  for (const auto& r : rs) *out_ << to_json(r).dump() << '\n';
  out_->flush();
}

}  // namespace loopinv
