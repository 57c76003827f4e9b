// Query-driven model learning: a flip-probe policy over plan-outcome queries
// and a two-query-per-action policy over action-precondition queries.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentprobe/agent.hpp"
#include "agentprobe/lifting.hpp"
#include "agentprobe/strips.hpp"

namespace agentprobe {

struct InterrogationConfig {
  std::size_t max_exec_candidates = 512;
  std::size_t walk_steps = 200;
  std::size_t walk_cap = kDefaultWalkCap;
  std::uint64_t seed = 0;
};

struct InterrogationTask {
  AgentChannel* agent = nullptr;
  Vocabulary vocabulary;
  std::vector<ActionHeader> headers;
  QueryKind query_class = QueryKind::kPlanOutcome;
  InterrogationConfig config;

  /// States from the agent's random walk, fetched once per task.
  const std::vector<State>& samples();

 private:
  std::optional<std::vector<State>> samples_;
};

/// Takes the action headers from the agent. Throws Error if it has none.
InterrogationTask make_task(AgentChannel& agent, Vocabulary vocabulary,
                            QueryKind query_class,
                            InterrogationConfig config = {});

struct TupleRecord {
  std::optional<Mode> mode;         // empty: unresolved
  std::vector<std::size_t> support;  // query log indices that fixed the mode
};

struct LearnedModel {
  LiftedModel model;  // built from the resolved tuples
  std::map<PalmKey, TupleRecord> tuples;
  std::vector<std::string> diagnostics;

  bool complete() const;
  std::set<PalmTuple> palm_tuples() const;  // resolved tuples only
  std::size_t unresolved() const;
};

struct ExecutingState {
  State state;
  CanonicalGrounding grounding;
  Answer answer;  // the PO response with length 1
  std::size_t attempts = 0;
};

/// Searches for a state in which some injective grounding of `header`
/// executes. Teleport agents get synthesized assignments over P*(a); walk
/// agents are probed in sampled reachable states.
std::optional<ExecutingState> find_executing_state(InterrogationTask& task,
                                                   const ActionHeader& header);

/// Effect modes read off one successful transition.
std::map<Atom, Mode> infer_effects(const std::vector<Atom>& lifted,
                                   const CanonicalGrounding& grounding,
                                   const State& before, const State& after);

struct FlipProbe {
  Atom atom;                   // lifted
  std::optional<State> state;  // the probed state, if one was available
  std::optional<Answer> answer;
  std::optional<Mode> mode;    // precondition mode; empty when unresolved
};

/// Queries the executing state with `atom` toggled and reads its precondition
/// mode from whether the action still executes.
FlipProbe infer_precondition(InterrogationTask& task,
                             const ExecutingState& executing,
                             const std::vector<Atom>& lifted, const Atom& atom);

LearnedModel learn_po(InterrogationTask& task);
LearnedModel learn_ap(InterrogationTask& task);
/// Dispatches on task.query_class.
LearnedModel learn(InterrogationTask& task);

/// The learner viewed as a function from answer strings to the next query;
/// empty means Stop. Walk services are forwarded to `task.agent`.
std::optional<Query> next_query(const InterrogationTask& task,
                                const std::vector<Response>& answers);

/// Fraction of the truth's palm tuples the learned model reproduces. Throws
/// Error when predicates or action headers differ.
double model_accuracy(const LearnedModel& learned, const LiftedModel& truth);
double model_accuracy(const LiftedModel& learned, const LiftedModel& truth);

struct AccuracyPoint {
  std::size_t query_index = 0;
  double accuracy = 0.0;
  QueryKind kind = QueryKind::kPlanOutcome;
};

/// Accuracy after each logged query, counting a tuple once its last
/// supporting query has been answered.
std::vector<AccuracyPoint> accuracy_trace(const LearnedModel& learned,
                                          const LiftedModel& truth,
                                          const QueryLog& log);

}  // namespace agentprobe
