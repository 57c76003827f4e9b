// Command-line front end: interrogate, baseline, dcdn and bench subcommands.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agentprobe/bench.hpp"
#include "agentprobe/pddl.hpp"

namespace fs = std::filesystem;
using namespace agentprobe;

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitBadInput = 2;

struct CommonOptions {
  std::string domain;
  std::string problem;
  std::string queries = "po";
  std::string backend = "truth";
  std::string capability = "teleport";
  std::size_t max_plan_length = 20;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::size_t horizon = 2;
  std::optional<std::size_t> budget;
};

struct BaselineOptions {
  std::size_t traces = 20;
  std::size_t length = 10;
  std::vector<std::string> filters;
  bool exhaustive = false;
  bool strip = false;
};

void add_model_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--domain", o.domain, "PDDL domain of the hidden agent")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--problem", o.problem, "PDDL problem supplying objects and init")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

void add_agent_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--backend", o.backend, "Agent backend")
      ->check(CLI::IsMember({"truth", "relational"}))
      ->capture_default_str();
  cmd->add_option("--capability", o.capability, "Which initial states the agent accepts")
      ->check(CLI::IsMember({"teleport", "walk"}))
      ->capture_default_str();
  cmd->add_option("--max-plan-len", o.max_plan_length, "Longest accepted query plan")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

RunConfig run_config(const CommonOptions& o) {
  RunConfig config;
  config.query_class = parse_query_class(o.queries);
  config.backend = parse_backend(o.backend);
  config.capability = parse_capability(o.capability);
  config.max_plan_length = o.max_plan_length;
  config.seed = o.seed;
  config.query_budget = o.budget;
  return config;
}

std::pair<LiftedModel, ProblemInstance> load(const CommonOptions& o) {
  LiftedModel model = pddl::parse_domain(pddl::read_source(o.domain));
  ProblemInstance problem = pddl::parse_problem(pddl::read_source(o.problem), model);
  return {std::move(model), std::move(problem)};
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int cmd_interrogate(const CommonOptions& o) {
  auto [truth, problem] = load(o);
  RunReport report = run_interrogation(truth, problem, run_config(o));
  write_run_artifacts(o.out, report);
  for (const auto& d : report.learned.diagnostics) std::cerr << "warning: " << d << '\n';
  std::cout << report.domain << ": " << to_string(report.query_class) << " queries "
            << report.queries << " (budget " << report.budget << "), accuracy "
            << report.accuracy << ", unresolved " << report.learned.unresolved()
            << ", spurious " << report.soundness.spurious.size() << ", missing "
            << report.soundness.missing.size() << '\n';
  if (!report.budget_met()) std::cerr << "error: query budget exceeded\n";
  return report.passed() ? 0 : kExitFailed;
}

int cmd_baseline(const CommonOptions& o, const BaselineOptions& b) {
  auto [truth, problem] = load(o);
  BaselineConfig config;
  config.traces = b.traces;
  config.length = b.length;
  config.seed = o.seed;
  config.exhaustive = b.exhaustive;
  config.strip = b.strip;
  for (const auto& f : b.filters) config.filters.push_back(parse_transition_filter(f));
  BaselineReport report = run_baseline(truth, problem, config);
  for (const auto& w : report.corpus.warnings) std::cerr << "warning: " << w << '\n';

  const fs::path out = o.out;
  std::ostringstream traces, tuples;
  write_traces(traces, report.corpus.traces);
  write_tuples_csv(tuples, report.soundness);
  write_text(out / "traces.tsv", traces.str());
  write_text(out / "baseline.pddl", pddl::serialize_domain(report.learned));
  write_text(out / "comparison.csv", tuples.str());
  std::cout << truth.name << ": " << report.corpus.transitions() << " transitions, accuracy "
            << report.accuracy << ", spurious " << report.soundness.spurious.size()
            << ", missing " << report.soundness.missing.size() << '\n';
  return 0;
}

int cmd_dcdn(const CommonOptions& o, const std::string& model_path,
             const std::string& plan_text) {
  auto [truth, problem] = load(o);
  LiftedModel model = truth;
  if (!model_path.empty()) {
    model = pddl::parse_domain(pddl::read_source(model_path));
  }
  Plan plan;
  if (plan_text.empty()) {
    Corpus walk = generate_traces(model, problem, 1, o.horizon, o.seed);
    if (!walk.traces.empty()) {
      for (const auto& step : walk.traces.front().steps) plan.push_back(step.action);
    }
  } else {
    std::istringstream in(plan_text);
    std::string token;
    while (in >> token) plan.push_back(pddl::parse_action_text(token));
  }
  CauseReport report = run_dcdn(model, problem, o.horizon, plan);
  std::ostringstream csv;
  write_cause_csv(csv, report.checks);
  write_text(fs::path(o.out) / "dcdn.dot", report.dot);
  write_text(fs::path(o.out) / "cause-report.csv", csv.str());
  std::cout << model.name << ": plan [" << to_string(plan) << "], " << report.checks.size()
            << " checks, " << report.failures() << " failed, " << report.inconclusive()
            << " inconclusive\n";
  return report.failures() == 0 ? 0 : kExitFailed;
}

int cmd_bench(const CommonOptions& o, const std::string& suite_path,
              std::optional<std::size_t> workers) {
  Suite suite = read_suite(suite_path);
  if (workers) suite.workers = *workers;
  RunConfig base = run_config(o);
  auto rows = run_bench(suite, base);
  std::ostringstream csv;
  write_bench_csv(csv, rows);
  write_text(fs::path(o.out) / "bench.csv", csv.str());
  std::cout << csv.str();
  const bool all_ok =
      std::all_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.ok(); });
  return all_ok ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn the action model of a black-box planning agent by querying it"};
  app.set_config("--config", "",
                 "INI configuration file with one [subcommand] section; flags override it");
  app.require_subcommand(1);

  CommonOptions interrogate_opts;
  auto* interrogate = app.add_subcommand("interrogate", "Learn a model by interrogation");
  add_model_options(interrogate, interrogate_opts);
  add_agent_options(interrogate, interrogate_opts);
  interrogate->add_option("--queries", interrogate_opts.queries, "Query class")
      ->check(CLI::IsMember({"po", "ap"}))
      ->capture_default_str();
  interrogate->add_option("--budget", interrogate_opts.budget,
                          "Maximum number of queries (default: the complexity envelope)");

  CommonOptions baseline_opts;
  BaselineOptions baseline_extra;
  auto* baseline = app.add_subcommand("baseline", "Learn from passive traces and compare");
  add_model_options(baseline, baseline_opts);
  baseline->add_option("--traces", baseline_extra.traces, "Number of traces")
      ->capture_default_str();
  baseline->add_option("--length", baseline_extra.length, "Steps per trace")
      ->capture_default_str();
  baseline->add_option("--filter", baseline_extra.filters,
                       "Transition filter, e.g. drive:src_blue(?s)");
  baseline->add_flag("--exhaustive", baseline_extra.exhaustive,
                     "Use the exhaustive single-step corpus instead of random walks");
  baseline->add_flag("--strip", baseline_extra.strip,
                     "Remove static predicates from learned preconditions");

  CommonOptions dcdn_opts;
  std::string dcdn_model;
  std::string dcdn_plan;
  auto* dcdn = app.add_subcommand("dcdn", "Build the causal network and check causes");
  add_model_options(dcdn, dcdn_opts);
  dcdn->add_option("--model", dcdn_model, "Model to analyse (default: the domain)")
      ->check(CLI::ExistingFile);
  dcdn->add_option("--plan", dcdn_plan, "Space-separated ground actions, e.g. drive(t1,l1,l2)");
  dcdn->add_option("--horizon", dcdn_opts.horizon, "Number of time steps")
      ->capture_default_str();

  CommonOptions bench_opts;
  std::string suite_path;
  std::optional<std::size_t> workers;
  auto* bench = app.add_subcommand("bench", "Run PO and AP interrogation over a suite");
  bench->add_option("--suite", suite_path, "Suite file")->required()->check(CLI::ExistingFile);
  add_agent_options(bench, bench_opts);
  bench->add_option("--seed", bench_opts.seed, "First seed")->capture_default_str();
  bench->add_option("--out", bench_opts.out, "Output directory")->capture_default_str();
  bench->add_option("--workers", workers, "Worker threads (default: from the suite)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*interrogate) return cmd_interrogate(interrogate_opts);
    if (*baseline) return cmd_baseline(baseline_opts, baseline_extra);
    if (*dcdn) return cmd_dcdn(dcdn_opts, dcdn_model, dcdn_plan);
    if (*bench) return cmd_bench(bench_opts, suite_path, workers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitBadInput;
}
