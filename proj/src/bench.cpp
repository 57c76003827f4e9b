#include "agentprobe/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "agentprobe/pddl.hpp"
#include "agentprobe/relational.hpp"

namespace agentprobe {
namespace {

std::string fixed(double value, int digits = 6) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

std::pair<double, double> mean_and_variance(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, var / static_cast<double>(values.size())};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return text.substr(first, text.find_last_not_of(" \t\r") - first + 1);
}

}  // namespace

std::string to_string(Backend backend) {
  return backend == Backend::kTruth ? "truth" : "relational";
}

Backend parse_backend(std::string_view text) {
  if (text == "truth") return Backend::kTruth;
  if (text == "relational") return Backend::kRelational;
  throw Error("unknown backend '" + std::string(text) + "' (truth|relational)");
}

QueryKind parse_query_class(std::string_view text) {
  if (text == "po") return QueryKind::kPlanOutcome;
  if (text == "ap") return QueryKind::kActionPrecondition;
  throw Error("unknown query class '" + std::string(text) + "' (po|ap)");
}

Capability parse_capability(std::string_view text) {
  if (text == "teleport") return Capability::kTeleport;
  if (text == "walk") return Capability::kWalk;
  throw Error("unknown capability '" + std::string(text) + "' (teleport|walk)");
}

std::size_t query_envelope(QueryKind kind, std::size_t p_star, std::size_t actions) {
  return kind == QueryKind::kPlanOutcome ? 4 * p_star * actions : 2 * actions;
}

bool RunReport::passed() const {
  return accuracy == 1.0 && learned.complete() && budget_met();
}

RunReport run_interrogation(const LiftedModel& truth, const ProblemInstance& problem,
                            const RunConfig& config) {
  HarnessConfig harness{config.max_plan_length, config.capability, true,
                        kDefaultExpansionBound};
  auto agent = config.backend == Backend::kTruth
                   ? make_simulated_agent(truth, problem, harness)
                   : make_relational_agent(truth, problem, harness);
  InterrogationConfig settings = config.interrogation;
  settings.seed = config.seed;
  InterrogationTask task =
      make_task(*agent, vocabulary_of(truth), config.query_class, settings);

  RunReport report;
  report.domain = truth.name;
  report.query_class = config.query_class;
  report.p_star = instantiated_vocabulary_size(truth.predicates, truth.headers());
  report.actions = truth.actions.size();
  report.budget = config.query_budget.value_or(
      query_envelope(config.query_class, report.p_star, report.actions));
  report.learned = learn(task);
  report.log = agent->log();
  report.queries = report.log.size();
  report.cache_hits = report.log.cache_hits();

  std::vector<double> millis;
  for (const auto& entry : report.log.entries()) millis.push_back(entry.micros / 1000.0);
  std::tie(report.t_mu_ms, report.t_var) = mean_and_variance(millis);

  report.accuracy = model_accuracy(report.learned, truth);
  report.soundness = compare_sound_complete(report.learned.model, truth);
  report.trace = accuracy_trace(report.learned, truth, report.log);
  return report;
}

void write_summary_csv(std::ostream& out, const std::vector<RunReport>& reports) {
  out << "domain,p_star,actions,queries,t_mu_ms,t_var,accuracy\n";
  for (const auto& r : reports) {
    out << r.domain << ',' << r.p_star << ',' << r.actions << ',' << r.queries << ','
        << fixed(r.t_mu_ms) << ',' << fixed(r.t_var) << ',' << fixed(r.accuracy)
        << '\n';
  }
}

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyPoint>& trace) {
  out << "query_index,accuracy,kind\n";
  for (const auto& point : trace) {
    out << point.query_index << ',' << fixed(point.accuracy) << ','
        << to_string(point.kind) << '\n';
  }
}

void write_provenance_csv(std::ostream& out, const LearnedModel& learned) {
  out << "action,location,atom,mode,support\n";
  for (const auto& [key, record] : learned.tuples) {
    out << key.action << ',' << to_string(key.location) << ',' << to_string(key.atom)
        << ',' << (record.mode ? to_string(*record.mode) : std::string("unresolved"))
        << ',';
    for (std::size_t i = 0; i < record.support.size(); ++i) {
      out << (i ? " " : "") << record.support[i];
    }
    out << '\n';
  }
}

void write_tuples_csv(std::ostream& out, const SoundnessReport& report) {
  out << "kind,action,location,atom,mode\n";
  auto rows = [&](const char* kind, const std::set<PalmTuple>& tuples) {
    for (const auto& t : tuples) {
      out << kind << ',' << t.action << ',' << to_string(t.location) << ','
          << to_string(t.atom) << ',' << to_string(t.mode) << '\n';
    }
  };
  rows("spurious", report.spurious);
  rows("missing", report.missing);
}

void write_run_artifacts(const std::filesystem::path& dir, const RunReport& report) {
  std::filesystem::create_directories(dir);
  write_file(dir / "learned.pddl", pddl::serialize_domain(report.learned.model));
  std::ostringstream log, accuracy, provenance, summary;
  report.log.write(log);
  write_accuracy_csv(accuracy, report.trace);
  write_provenance_csv(provenance, report.learned);
  write_summary_csv(summary, {report});
  write_file(dir / "queries.log", log.str());
  write_file(dir / "accuracy.csv", accuracy.str());
  write_file(dir / "provenance.csv", provenance.str());
  write_file(dir / "summary.csv", summary.str());
}

BaselineReport run_baseline(const LiftedModel& truth, const ProblemInstance& problem,
                            const BaselineConfig& config) {
  BaselineReport report;
  report.corpus = config.exhaustive
                      ? exhaustive_corpus(truth, problem)
                      : generate_traces(truth, problem, config.traces, config.length,
                                        config.seed, config.filters);
  for (const auto& trace : report.corpus.traces) validate_trace(truth, trace);
  report.learned =
      learn_from_traces(report.corpus.traces, vocabulary_of(truth), truth.headers());
  if (config.strip) report.learned = strip_static(report.learned);
  report.soundness = compare_sound_complete(report.learned, truth);
  report.accuracy = model_accuracy(report.learned, truth);
  return report;
}

std::size_t CauseReport::failures() const {
  return static_cast<std::size_t>(std::count_if(
      checks.begin(), checks.end(), [](const CauseCheck& c) {
        return c.verdict.status != CauseStatus::kInconclusive && !c.passed();
      }));
}

std::size_t CauseReport::inconclusive() const {
  return static_cast<std::size_t>(std::count_if(
      checks.begin(), checks.end(), [](const CauseCheck& c) {
        return c.verdict.status == CauseStatus::kInconclusive;
      }));
}

CauseReport run_dcdn(const LiftedModel& model, const ProblemInstance& problem,
                     std::size_t horizon, const Plan& plan) {
  auto network = std::make_shared<const Dcdn>(build_dcdn(model, problem, horizon));
  CauseReport report;
  report.dot = export_dot(*network);
  report.plan = plan;
  report.checks = standard_cause_checks(make_setting(network, problem.init, plan));
  return report;
}

void write_cause_csv(std::ostream& out, const std::vector<CauseCheck>& checks) {
  out << "family,cause,effect,expected,status,ac1,ac2,ac3,pass\n";
  for (const auto& c : checks) {
    out << c.family << ",\"" << c.cause << "\",\"" << c.effect << "\","
        << (c.expected_cause ? "cause" : "not-cause") << ','
        << to_string(c.verdict.status) << ',' << c.verdict.ac1 << ',' << c.verdict.ac2
        << ',' << c.verdict.ac3 << ','
        << (c.verdict.status == CauseStatus::kInconclusive
                ? "inconclusive"
                : (c.passed() ? "pass" : "fail"))
        << '\n';
  }
}

Suite read_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read suite " + path.string());
  Suite suite;
  const auto base = path.parent_path();
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    if (auto eq = line.find('='); eq != std::string::npos) {
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "seeds") {
        suite.seeds = std::stoul(value);
      } else if (key == "workers") {
        suite.workers = std::stoul(value);
      } else {
        throw Error(path.string() + ":" + std::to_string(number) + ": unknown key '" +
                    key + "'");
      }
      continue;
    }
    std::istringstream fields(line);
    SuiteEntry entry;
    std::string domain, problem;
    if (!(fields >> entry.name >> domain >> problem)) {
      throw Error(path.string() + ":" + std::to_string(number) +
                  ": expected `name domain problem`");
    }
    entry.domain = base / domain;
    entry.problem = base / problem;
    suite.entries.push_back(std::move(entry));
  }
  if (suite.entries.empty()) throw Error("suite " + path.string() + " lists no domains");
  if (suite.seeds == 0) throw Error("suite needs at least one seed");
  return suite;
}

namespace {

BenchRow bench_entry(const SuiteEntry& entry, std::size_t seeds, const RunConfig& base) {
  BenchRow row;
  row.domain = entry.name;
  row.seeds = seeds;
  try {
    const LiftedModel truth = pddl::parse_domain(pddl::read_source(entry.domain));
    const ProblemInstance problem =
        pddl::parse_problem(pddl::read_source(entry.problem), truth);
    row.p_star = instantiated_vocabulary_size(truth.predicates, truth.headers());
    row.actions = truth.actions.size();
    std::vector<double> po, ap;
    row.po_accuracy = 1.0;
    row.ap_accuracy = 1.0;
    std::vector<std::string> problems;
    for (std::size_t s = 0; s < seeds; ++s) {
      for (QueryKind kind : {QueryKind::kPlanOutcome, QueryKind::kActionPrecondition}) {
        RunConfig config = base;
        config.seed = base.seed + s;
        config.query_class = kind;
        config.query_budget.reset();
        RunReport report = run_interrogation(truth, problem, config);
        const bool is_po = kind == QueryKind::kPlanOutcome;
        (is_po ? po : ap).push_back(static_cast<double>(report.queries));
        double& accuracy = is_po ? row.po_accuracy : row.ap_accuracy;
        accuracy = std::min(accuracy, report.accuracy);
        if (!report.passed()) {
          problems.push_back(to_string(kind) + " seed " + std::to_string(config.seed) +
                             " failed");
        }
      }
    }
    std::tie(row.po_mean, row.po_var) = mean_and_variance(po);
    std::tie(row.ap_mean, row.ap_var) = mean_and_variance(ap);
    if (!(row.ap_mean < row.po_mean)) problems.push_back("AP count not below PO count");
    row.status = "ok";
    if (!problems.empty()) {
      row.status.clear();
      for (const auto& p : problems) row.status += (row.status.empty() ? "" : "; ") + p;
    }
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
  }
  return row;
}

}  // namespace

std::vector<BenchRow> run_bench(const Suite& suite, const RunConfig& base) {
  if (suite.entries.empty()) throw Error("empty suite");
  std::vector<BenchRow> rows(suite.entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < suite.entries.size(); i = next++) {
      rows[i] = bench_entry(suite.entries[i], suite.seeds, base);
    }
  };
  const std::size_t width = std::max<std::size_t>(
      1, std::min(suite.workers, suite.entries.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < width; ++i) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();
  std::sort(rows.begin(), rows.end(),
            [](const BenchRow& a, const BenchRow& b) { return a.domain < b.domain; });
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "domain,p_star,actions,seeds,po_queries_mean,po_queries_var,"
         "ap_queries_mean,ap_queries_var,po_accuracy,ap_accuracy,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out << r.domain << ',' << r.p_star << ',' << r.actions << ',' << r.seeds << ','
        << fixed(r.po_mean, 3) << ',' << fixed(r.po_var, 3) << ',' << fixed(r.ap_mean, 3)
        << ',' << fixed(r.ap_var, 3) << ',' << fixed(r.po_accuracy) << ','
        << fixed(r.ap_accuracy) << ',' << status << '\n';
  }
}

}  // namespace agentprobe
