#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loopinv/run_record.hpp"

namespace loopinv {

class MissingSamples : public Error {
 public:
  MissingSamples(std::string problem, std::size_t needed, std::size_t have)
      : Error("problem " + problem + " has " + std::to_string(have) + " samples, k=" +
              std::to_string(needed) + " needs more"),
        problem_(std::move(problem)),
        needed_(needed) {}

  const std::string& problem() const { return problem_; }
  std::size_t needed() const { return needed_; }

 private:
  std::string problem_;
  std::size_t needed_;
};

struct StrategyMetrics {
  std::string strategy;
  std::size_t problems = 0;
  /// k -> number of problems with a Valid sample among samples 0..k-1; absent
  /// when some problem has fewer than k samples.
  std::map<std::size_t, std::optional<std::size_t>> solved;

  /// Percentage for k, or nullopt when samples are missing.
  std::optional<double> percent(std::size_t k) const;
};

struct RepairMetrics {
  std::string strategy;
  std::size_t lineages = 0;
  /// Lineages ending Valid or fixed by sanitization alone.
  std::size_t repaired = 0;
  std::size_t cycles = 0;

  double rate() const { return lineages == 0 ? 0.0 : 100.0 * repaired / lineages; }
};

struct Metrics {
  std::vector<StrategyMetrics> strategies;
  std::vector<RepairMetrics> repair;
  /// Failure class -> count over all records: "IllFormed",
  /// "Violated(Consecution)", "Timeout", "TokenLimit", ...
  std::map<std::string, std::size_t> failures;
};

inline const std::vector<std::size_t> kDefaultKs = {10, 30, 50};

/// Solved-at-k over the Generate and Final records of every strategy, using
/// sample-index prefixes. A problem whose request failed counts as unsolved.
/// Throws MissingSamples when any problem has fewer than k samples.
Metrics compute_solved_at_k(const std::vector<RunRecord>& log, const std::vector<std::size_t>& ks);

/// Same as compute_solved_at_k, but leaves the k entries empty instead of
/// throwing.
Metrics summarize(const std::vector<RunRecord>& log, const std::vector<std::size_t>& ks);

inline constexpr std::string_view kReportSchema = "loopinv.report/v1";

/// Machine-readable summary. Contains no timings, so repeated runs over the
/// same inputs serialize identically.
nlohmann::json report_json(const Metrics& m);
std::string report_text(const Metrics& m);

}  // namespace loopinv
