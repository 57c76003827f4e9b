// Runs of the learners against simulated agents, their reports, the CSV
// artifacts they produce and the multi-domain benchmark suite.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "agentprobe/agent.hpp"
#include "agentprobe/baseline.hpp"
#include "agentprobe/dcdn.hpp"
#include "agentprobe/interrogation.hpp"
#include "agentprobe/strips.hpp"

namespace agentprobe {

enum class Backend { kTruth, kRelational };

std::string to_string(Backend backend);
Backend parse_backend(std::string_view text);
QueryKind parse_query_class(std::string_view text);
Capability parse_capability(std::string_view text);

struct RunConfig {
  QueryKind query_class = QueryKind::kPlanOutcome;
  Backend backend = Backend::kTruth;
  Capability capability = Capability::kTeleport;
  std::size_t max_plan_length = 20;
  std::uint64_t seed = 0;
  std::optional<std::size_t> query_budget;  // default: query_envelope()
  InterrogationConfig interrogation;
};

/// Upper bound on queries: 4 |P*| |A| for plan-outcome, 2 |A| for
/// action-precondition interrogation.
std::size_t query_envelope(QueryKind kind, std::size_t p_star, std::size_t actions);

struct RunReport {
  std::string domain;
  QueryKind query_class = QueryKind::kPlanOutcome;
  std::size_t p_star = 0;
  std::size_t actions = 0;
  std::size_t queries = 0;
  std::size_t cache_hits = 0;
  std::size_t budget = 0;
  double t_mu_ms = 0.0;
  double t_var = 0.0;  // ms^2
  double accuracy = 0.0;
  LearnedModel learned;
  SoundnessReport soundness;
  std::vector<AccuracyPoint> trace;
  QueryLog log;

  bool budget_met() const { return queries <= budget; }
  /// Accuracy 1, nothing unresolved, budget met.
  bool passed() const;
};

/// Interrogates an agent simulating `truth` and scores the result.
RunReport run_interrogation(const LiftedModel& truth, const ProblemInstance& problem,
                            const RunConfig& config);

void write_summary_csv(std::ostream& out, const std::vector<RunReport>& reports);
void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyPoint>& trace);
void write_provenance_csv(std::ostream& out, const LearnedModel& learned);
void write_tuples_csv(std::ostream& out, const SoundnessReport& report);

/// learned.pddl, queries.log, accuracy.csv, provenance.csv, summary.csv.
void write_run_artifacts(const std::filesystem::path& dir, const RunReport& report);

struct BaselineConfig {
  std::size_t traces = 20;
  std::size_t length = 10;
  std::uint64_t seed = 0;
  std::vector<TransitionFilter> filters;
  bool exhaustive = false;
  bool strip = false;
};

struct BaselineReport {
  Corpus corpus;
  LiftedModel learned;
  SoundnessReport soundness;
  double accuracy = 0.0;
};

BaselineReport run_baseline(const LiftedModel& truth, const ProblemInstance& problem,
                            const BaselineConfig& config);

struct CauseReport {
  std::string dot;
  Plan plan;
  std::vector<CauseCheck> checks;

  std::size_t failures() const;
  std::size_t inconclusive() const;
};

/// Builds the network for `model`, sets the problem's initial state as
/// context and runs the standard cause-check family over `plan`.
CauseReport run_dcdn(const LiftedModel& model, const ProblemInstance& problem,
                     std::size_t horizon, const Plan& plan);

void write_cause_csv(std::ostream& out, const std::vector<CauseCheck>& checks);

struct SuiteEntry {
  std::string name;
  std::filesystem::path domain;
  std::filesystem::path problem;
};

struct Suite {
  std::vector<SuiteEntry> entries;
  std::size_t seeds = 3;
  std::size_t workers = 4;
};

/// Text format: `seeds = N`, `workers = N`, and `name domain problem` lines;
/// paths are relative to the suite file. Throws Error on an empty suite.
Suite read_suite(const std::filesystem::path& path);

struct BenchRow {
  std::string domain;
  std::size_t p_star = 0;
  std::size_t actions = 0;
  std::size_t seeds = 0;
  double po_mean = 0.0;
  double po_var = 0.0;
  double ap_mean = 0.0;
  double ap_var = 0.0;
  double po_accuracy = 0.0;
  double ap_accuracy = 0.0;
  std::string status;  // "ok" or a failure description

  bool ok() const { return status == "ok"; }
};

/// Runs every entry over `suite.seeds` seeds starting at `base.seed`, on a
/// pool of `suite.workers` threads. Rows are sorted by domain name; a failing
/// entry yields a row with a failure status instead of aborting the suite.
std::vector<BenchRow> run_bench(const Suite& suite, const RunConfig& base);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace agentprobe
