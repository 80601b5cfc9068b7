#include "loopinv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace loopinv {

namespace {

struct ProblemSamples {
  bool request_failed = false;
  std::set<int> indices;
  std::optional<int> first_valid;
};

std::optional<std::string> failure_class(const RunRecord& r) {
  switch (r.outcome.kind) {
    case OutcomeKind::Valid:
    case OutcomeKind::Holds:
    case OutcomeKind::ExtractorFixed:
      return std::nullopt;
    case OutcomeKind::Violated:
      return "Violated(" +
             std::string(to_string(r.outcome.condition.value_or(Condition::Initiation))) + ")";
    case OutcomeKind::IllFormed:
      return "IllFormed";
    case OutcomeKind::Timeout:
      return "Timeout";
    case OutcomeKind::SolverFailure:
      return "SolverFailure";
    case OutcomeKind::TokenLimit:
      return "TokenLimit";
    case OutcomeKind::RequestFailed:
      return "RequestFailed";
    case OutcomeKind::CycleDetected:
      return "CycleDetected";
  }
  return std::nullopt;
}

Metrics compute(const std::vector<RunRecord>& log, const std::vector<std::size_t>& ks, bool strict) {
  std::map<std::string, std::map<std::string, ProblemSamples>> by_strategy;
  // lineage id -> (repair strategy, last record)
  std::map<std::string, std::pair<std::string, const RunRecord*>> lineages;
  Metrics m;

  for (const auto& r : log) {
    if (auto cls = failure_class(r)) ++m.failures[*cls];
    if (r.phase == Phase::Generate || r.phase == Phase::Final) {
      auto& ps = by_strategy[r.strategy][r.problem_id];
      if (r.sample_index < 0) {
        ps.request_failed = true;
        continue;
      }
      ps.indices.insert(r.sample_index);
      if (r.outcome.kind == OutcomeKind::Valid &&
          (!ps.first_valid || r.sample_index < *ps.first_valid))
        ps.first_valid = r.sample_index;
    } else if (r.phase == Phase::Repair) {
      auto& entry = lineages[r.lineage_id];
      entry.first = r.strategy;
      if (entry.second == nullptr || r.attempt >= entry.second->attempt) entry.second = &r;
    }
  }

  for (const auto& [strategy, problems] : by_strategy) {
    StrategyMetrics sm{strategy, problems.size(), {}};
    for (std::size_t k : ks) {
      std::optional<std::size_t> solved = 0;
      for (const auto& [id, ps] : problems) {
        if (ps.request_failed) continue;
        // Samples 0..k-1 must all be present.
        std::size_t have = static_cast<std::size_t>(
            std::distance(ps.indices.begin(), ps.indices.lower_bound(static_cast<int>(k))));
        if (have < k) {
          if (strict) throw MissingSamples(id, k, ps.indices.size());
          solved.reset();
          break;
        }
        if (ps.first_valid && static_cast<std::size_t>(*ps.first_valid) < k) ++*solved;
      }
      sm.solved[k] = solved;
    }
    m.strategies.push_back(std::move(sm));
  }

  std::map<std::string, RepairMetrics> repair;
  for (const auto& [id, entry] : lineages) {
    auto& rm = repair[entry.first];
    rm.strategy = entry.first;
    ++rm.lineages;
    const OutcomeKind last = entry.second->outcome.kind;
    if (last == OutcomeKind::Valid || last == OutcomeKind::ExtractorFixed) ++rm.repaired;
    if (last == OutcomeKind::CycleDetected) ++rm.cycles;
  }
  for (auto& [_, rm] : repair) m.repair.push_back(std::move(rm));
  return m;
}

// Fixed rounding keeps the JSON independent of floating-point noise.
double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

std::optional<double> StrategyMetrics::percent(std::size_t k) const {
  auto it = solved.find(k);
  if (it == solved.end() || !it->second || problems == 0) return std::nullopt;
  return 100.0 * static_cast<double>(*it->second) / static_cast<double>(problems);
}

Metrics compute_solved_at_k(const std::vector<RunRecord>& log, const std::vector<std::size_t>& ks) {
  return compute(log, ks, true);
}

Metrics summarize(const std::vector<RunRecord>& log, const std::vector<std::size_t>& ks) {
  return compute(log, ks, false);
}

nlohmann::json report_json(const Metrics& m) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : m.strategies) {
    nlohmann::json pct = nlohmann::json::object(), counts = nlohmann::json::object();
    for (const auto& [k, solved] : s.solved) {
      const std::string key = std::to_string(k);
      auto p = s.percent(k);
      pct[key] = p ? nlohmann::json(round4(*p)) : nlohmann::json(nullptr);
      counts[key] = solved ? nlohmann::json(*solved) : nlohmann::json(nullptr);
    }
    strategies.push_back({{"strategy", s.strategy},
                          {"problems", s.problems},
                          {"solved_at_k", std::move(pct)},
                          {"solved_counts", std::move(counts)}});
  }

  nlohmann::json repair = nlohmann::json::array();
  for (const auto& r : m.repair)
    repair.push_back({{"strategy", r.strategy},
                      {"lineages", r.lineages},
                      {"repaired", r.repaired},
                      {"cycles", r.cycles},
                      {"success_rate", round4(r.rate())}});

  std::size_t total = 0;
  for (const auto& [_, n] : m.failures) total += n;
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, n] : m.failures)
    classes[cls] = {{"count", n}, {"percent", round4(100.0 * static_cast<double>(n) / static_cast<double>(total))}};

  return {{"schema", kReportSchema},
          {"strategies", std::move(strategies)},
          {"repair", std::move(repair)},
          {"failures", {{"total", total}, {"classes", std::move(classes)}}}};
}

std::string report_text(const Metrics& m) {
  std::string out;
  if (m.strategies.empty()) {
    out += "no generation records\n";
  } else {
    std::set<std::size_t> ks;
    for (const auto& s : m.strategies)
      for (const auto& [k, _] : s.solved) ks.insert(k);
    out += "strategy                         problems";
    for (std::size_t k : ks) {
      std::string col = "k=" + std::to_string(k);
      out += std::string(10 - std::min<std::size_t>(col.size(), 9), ' ') + col;
    }
    out += "\n";
    for (const auto& s : m.strategies) {
      std::string name = s.strategy;
      if (name.size() < 32) name.resize(32, ' ');
      std::string n = std::to_string(s.problems);
      out += name + " " + std::string(8 - std::min<std::size_t>(n.size(), 7), ' ') + n;
      for (std::size_t k : ks) {
        auto p = s.percent(k);
        std::string cell = p ? fixed1(*p) + "%" : "n/a";
        out += std::string(10 - std::min<std::size_t>(cell.size(), 9), ' ') + cell;
      }
      out += "\n";
    }
  }
  if (!m.repair.empty()) {
    out += "\nrepair\n";
    for (const auto& r : m.repair)
      out += "  " + r.strategy + ": " + std::to_string(r.repaired) + "/" +
             std::to_string(r.lineages) + " lineages repaired (" + fixed1(r.rate()) + "%), " +
             std::to_string(r.cycles) + " cycles\n";
  }
  if (!m.failures.empty()) {
    std::size_t total = 0;
    for (const auto& [_, n] : m.failures) total += n;
    out += "\nfailures (" + std::to_string(total) + ")\n";
    for (const auto& [cls, n] : m.failures)
      out += "  " + cls + ": " + std::to_string(n) + " (" +
             fixed1(100.0 * static_cast<double>(n) / static_cast<double>(total)) + "%)\n";
  }
  return out;
}

}  // namespace loopinv
