#include "agentprobe/interrogation.hpp"

#include <algorithm>
#include <utility>

namespace agentprobe {
namespace {

const ResponsePO& as_po(const Answer& answer) {
  return std::get<ResponsePO>(answer.response);
}

const ResponseAP& as_ap(const Answer& answer) {
  return std::get<ResponseAP>(answer.response);
}

Answer ask_single(InterrogationTask& task, QueryKind kind, const State& state,
                  const GroundAction& action) {
  return task.agent->ask({kind, state, {action}});
}

std::optional<ExecutingState> find_executing_teleport(InterrogationTask& task,
                                                      const ActionHeader& header) {
  const ObjectSet objects = task.agent->objects();
  auto grounding = canonical_grounding(header, objects);
  if (!grounding) return std::nullopt;
  const auto lifted = instantiate_with_parameters(task.vocabulary.predicates, header);
  const std::size_t n = lifted.size();
  const std::size_t budget = task.config.max_exec_candidates;

  std::set<std::vector<bool>> tried;
  std::size_t attempts = 0;
  auto attempt = [&](const std::vector<bool>& assignment) -> std::optional<ExecutingState> {
    if (attempts >= budget || !tried.insert(assignment).second) return std::nullopt;
    ++attempts;
    State state;
    for (std::size_t i = 0; i < n; ++i) {
      if (assignment[i]) state.insert(grounding->ground(lifted[i]));
    }
    Answer answer = ask_single(task, QueryKind::kPlanOutcome, state, grounding->action);
    if (as_po(answer).length != 1) return std::nullopt;
    return ExecutingState{std::move(state), *grounding, std::move(answer), attempts};
  };

  if (auto found = attempt(std::vector<bool>(n, false))) return found;
  if (auto found = attempt(std::vector<bool>(n, true))) return found;

  const auto groundings = injective_groundings(header, objects);
  for (const State& sample : task.samples()) {
    for (const auto& h : groundings) {
      if (attempts >= budget) return std::nullopt;
      std::vector<bool> assignment(n);
      for (std::size_t i = 0; i < n; ++i) {
        assignment[i] = sample.contains(h.ground(lifted[i]));
      }
      if (auto found = attempt(assignment)) return found;
    }
  }

  for (std::uint64_t mask = 0; attempts < budget && (n >= 64 || mask >> n == 0);
       ++mask) {
    std::vector<bool> assignment(n);
    for (std::size_t i = 0; i < n && i < 64; ++i) assignment[i] = (mask >> i) & 1U;
    if (auto found = attempt(assignment)) return found;
  }
  return std::nullopt;
}

std::optional<ExecutingState> find_executing_walk(InterrogationTask& task,
                                                  const ActionHeader& header) {
  const auto groundings = injective_groundings(header, task.agent->objects());
  std::size_t attempts = 0;
  for (const State& sample : task.samples()) {
    for (const auto& h : groundings) {
      if (attempts >= task.config.max_exec_candidates) return std::nullopt;
      ++attempts;
      Answer answer = ask_single(task, QueryKind::kPlanOutcome, sample, h.action);
      if (as_po(answer).length == 1) {
        return ExecutingState{sample, h, std::move(answer), attempts};
      }
    }
  }
  return std::nullopt;
}

struct Observation {
  bool before = false;
  bool after = false;
  std::size_t index = 0;
};

Mode mode_of(const std::set<Literal>& literals, const Atom& atom) {
  if (literals.contains({atom, true})) return Mode::kPositive;
  if (literals.contains({atom, false})) return Mode::kNegative;
  return Mode::kAbsent;
}

void add_unresolved(LearnedModel& learned, const ActionHeader& header,
                    const std::vector<Atom>& lifted) {
  for (const auto& atom : lifted) {
    learned.tuples[{atom, header.name, Location::kPre}] = {};
    learned.tuples[{atom, header.name, Location::kEff}] = {};
  }
}

void finish(LearnedModel& learned, const LiftedModel& skeleton) {
  learned.model = model_from_palm_tuples(skeleton, learned.palm_tuples());
}

void check_vocabulary(const LiftedModel& learned, const LiftedModel& truth) {
  if (learned.predicates != truth.predicates) {
    throw Error("vocabulary mismatch: predicate sets differ");
  }
  if (learned.headers() != truth.headers()) {
    throw Error("vocabulary mismatch: action headers differ");
  }
}

}  // namespace

const std::vector<State>& InterrogationTask::samples() {
  if (!samples_) {
    samples_ = agent->sample_states(config.walk_steps, config.seed, config.walk_cap);
  }
  return *samples_;
}

InterrogationTask make_task(AgentChannel& agent, Vocabulary vocabulary,
                            QueryKind query_class, InterrogationConfig config) {
  InterrogationTask task;
  task.agent = &agent;
  task.vocabulary = std::move(vocabulary);
  task.headers = agent.headers();
  task.query_class = query_class;
  task.config = config;
  if (task.headers.empty()) throw Error("agent exposes no action headers");
  return task;
}

bool LearnedModel::complete() const { return unresolved() == 0; }

std::size_t LearnedModel::unresolved() const {
  return static_cast<std::size_t>(
      std::count_if(tuples.begin(), tuples.end(),
                    [](const auto& entry) { return !entry.second.mode; }));
}

std::set<PalmTuple> LearnedModel::palm_tuples() const {
  std::set<PalmTuple> out;
  for (const auto& [key, record] : tuples) {
    if (record.mode) out.insert({key.atom, key.action, key.location, *record.mode});
  }
  return out;
}

std::optional<ExecutingState> find_executing_state(InterrogationTask& task,
                                                   const ActionHeader& header) {
  return task.agent->capability() == Capability::kTeleport
             ? find_executing_teleport(task, header)
             : find_executing_walk(task, header);
}

std::map<Atom, Mode> infer_effects(const std::vector<Atom>& lifted,
                                   const CanonicalGrounding& grounding,
                                   const State& before, const State& after) {
  std::map<Atom, Mode> modes;
  for (const auto& atom : lifted) {
    const Atom ground = grounding.ground(atom);
    const bool was = before.contains(ground);
    const bool is = after.contains(ground);
    modes[atom] = was == is ? Mode::kAbsent : (is ? Mode::kPositive : Mode::kNegative);
  }
  return modes;
}

FlipProbe infer_precondition(InterrogationTask& task,
                             const ExecutingState& executing,
                             const std::vector<Atom>& lifted, const Atom& atom) {
  const CanonicalGrounding& g = executing.grounding;
  const Atom target = g.ground(atom);
  const bool holds = executing.state.contains(target);
  FlipProbe probe{atom, std::nullopt, std::nullopt, std::nullopt};

  if (task.agent->capability() == Capability::kTeleport) {
    State flipped = executing.state;
    flipped.set(target, !holds);
    probe.state = std::move(flipped);
  } else {
    std::set<Atom> require_true;
    std::set<Atom> require_false;
    for (const auto& other : lifted) {
      const Atom ground = g.ground(other);
      const bool value = ground == target ? !holds : executing.state.contains(ground);
      (value ? require_true : require_false).insert(ground);
    }
    ReachOutcome reached = task.agent->reach(require_true, require_false);
    if (!reached.state) return probe;
    probe.state = std::move(reached.state);
  }

  probe.answer = ask_single(task, QueryKind::kPlanOutcome, *probe.state, g.action);
  if (as_po(*probe.answer).length == 0) {
    probe.mode = holds ? Mode::kPositive : Mode::kNegative;
  } else {
    probe.mode = Mode::kAbsent;
  }
  return probe;
}

LearnedModel learn_po(InterrogationTask& task) {
  const LiftedModel skeleton = skeleton_from(task.vocabulary, task.headers);
  LearnedModel learned;
  for (const auto& header : task.headers) {
    const auto lifted = instantiate_with_parameters(task.vocabulary.predicates, header);
    auto executing = find_executing_state(task, header);
    if (!executing) {
      learned.diagnostics.push_back(
          header.name + ": no executing state found within " +
          std::to_string(task.config.max_exec_candidates) +
          " candidates; action unlearnable under budget");
      add_unresolved(learned, header, lifted);
      continue;
    }
    const CanonicalGrounding& g = executing->grounding;

    std::vector<std::vector<Observation>> observed(lifted.size());
    auto record = [&](const State& before, const Answer& answer) {
      const ResponsePO& po = as_po(answer);
      if (po.length != 1) return;
      for (std::size_t i = 0; i < lifted.size(); ++i) {
        const Atom ground = g.ground(lifted[i]);
        observed[i].push_back(
            {before.contains(ground), po.state.contains(ground), answer.index});
      }
    };
    record(executing->state, executing->answer);

    std::vector<std::optional<Mode>> pre(lifted.size());
    for (std::size_t i = 0; i < lifted.size(); ++i) {
      FlipProbe probe = infer_precondition(task, *executing, lifted, lifted[i]);
      pre[i] = probe.mode;
      TupleRecord& slot = learned.tuples[{lifted[i], header.name, Location::kPre}];
      slot.mode = probe.mode;
      if (probe.answer) {
        slot.support = {executing->answer.index, probe.answer->index};
        record(*probe.state, *probe.answer);
      } else {
        learned.diagnostics.push_back(header.name + ": precondition mode of " +
                                      to_string(lifted[i]) +
                                      " unresolved, no reachable flip state");
      }
    }

    for (std::size_t i = 0; i < lifted.size(); ++i) {
      bool stays_false = false;
      bool stays_true = false;
      std::vector<std::size_t> up_support;
      std::vector<std::size_t> down_support;
      std::vector<std::size_t> all_support;
      for (const Observation& o : observed[i]) {
        all_support.push_back(o.index);
        if (!o.before && o.after) up_support.push_back(o.index);
        if (o.before && !o.after) down_support.push_back(o.index);
        if (!o.before && !o.after) stays_false = true;
        if (o.before && o.after) stays_true = true;
      }
      const bool up = !up_support.empty();
      const bool down = !down_support.empty();
      TupleRecord& slot = learned.tuples[{lifted[i], header.name, Location::kEff}];
      if (up && down) {
        learned.diagnostics.push_back(header.name + ": effect on " +
                                      to_string(lifted[i]) +
                                      " observed in both directions");
      } else if (up) {
        slot = {Mode::kPositive, up_support};
      } else if (down) {
        slot = {Mode::kNegative, down_support};
      } else if ((stays_false || pre[i] == Mode::kPositive) &&
                 (stays_true || pre[i] == Mode::kNegative)) {
        slot.mode = Mode::kAbsent;
        slot.support = all_support;
        if (!stays_false || !stays_true) {
          const auto& pre_support =
              learned.tuples[{lifted[i], header.name, Location::kPre}].support;
          slot.support.insert(slot.support.end(), pre_support.begin(),
                              pre_support.end());
        }
      } else {
        learned.diagnostics.push_back(header.name + ": effect mode of " +
                                      to_string(lifted[i]) + " unresolved");
      }
      std::sort(slot.support.begin(), slot.support.end());
      slot.support.erase(std::unique(slot.support.begin(), slot.support.end()),
                         slot.support.end());
    }
  }
  finish(learned, skeleton);
  return learned;
}

LearnedModel learn_ap(InterrogationTask& task) {
  if (task.agent->capability() != Capability::kTeleport) {
    throw Error("action-precondition interrogation requires a teleport agent");
  }
  const LiftedModel skeleton = skeleton_from(task.vocabulary, task.headers);
  const ObjectSet objects = task.agent->objects();
  LearnedModel learned;
  for (const auto& header : task.headers) {
    const auto lifted = instantiate_with_parameters(task.vocabulary.predicates, header);
    auto g = canonical_grounding(header, objects);
    if (!g) {
      learned.diagnostics.push_back(header.name + ": too few objects for an injective grounding");
      add_unresolved(learned, header, lifted);
      continue;
    }
    auto ask_ap = [&](const State& state) {
      return ask_single(task, QueryKind::kActionPrecondition, state, g->action);
    };
    const std::set<Atom> vocabulary(lifted.begin(), lifted.end());

    std::set<Literal> pre;
    std::vector<std::size_t> pre_support;
    std::map<Atom, Mode> eff;
    std::vector<std::size_t> eff_support;
    bool effects_known = false;

    const State none;
    Answer first = ask_ap(none);
    if (!as_ap(first).succeeded()) {
      pre = as_ap(first).failed_preconditions;
      pre_support = {first.index};
    } else {
      State all;
      for (const auto& atom : lifted) all.insert(g->ground(atom));
      Answer second = ask_ap(all);
      auto from_none = infer_effects(lifted, *g, none, *as_ap(first).final_state);
      if (!as_ap(second).succeeded()) {
        pre = as_ap(second).failed_preconditions;
        pre_support = {second.index};
        eff = std::move(from_none);
        eff_support = {first.index};
      } else {
        pre_support = {first.index, second.index};
        auto from_all = infer_effects(lifted, *g, all, *as_ap(second).final_state);
        for (const auto& atom : lifted) {
          eff[atom] = from_none[atom] != Mode::kAbsent ? from_none[atom] : from_all[atom];
        }
        eff_support = pre_support;
      }
      effects_known = true;
    }

    const bool pre_in_vocabulary =
        std::all_of(pre.begin(), pre.end(),
                    [&](const Literal& lit) { return vocabulary.contains(lit.atom); });
    if (!pre_in_vocabulary) {
      learned.diagnostics.push_back(header.name +
                                    ": reported preconditions fall outside P*(a)");
      add_unresolved(learned, header, lifted);
      continue;
    }

    if (!effects_known) {
      State satisfying;
      for (const auto& lit : pre) {
        if (lit.positive) satisfying.insert(g->ground(lit.atom));
      }
      Answer second = ask_ap(satisfying);
      if (as_ap(second).succeeded()) {
        eff = infer_effects(lifted, *g, satisfying, *as_ap(second).final_state);
        eff_support = {second.index};
        effects_known = true;
      } else {
        learned.diagnostics.push_back(header.name +
                                      ": fails in a state satisfying its reported preconditions");
      }
    }

    for (const auto& atom : lifted) {
      learned.tuples[{atom, header.name, Location::kPre}] = {mode_of(pre, atom),
                                                              pre_support};
      TupleRecord& slot = learned.tuples[{atom, header.name, Location::kEff}];
      if (effects_known) slot = {eff.at(atom), eff_support};
    }
  }
  finish(learned, skeleton);
  return learned;
}

LearnedModel learn(InterrogationTask& task) {
  return task.query_class == QueryKind::kPlanOutcome ? learn_po(task) : learn_ap(task);
}

namespace {

struct PendingQuery {
  Query query;
};

/// Replays a fixed answer string. The first query beyond it is thrown as
/// PendingQuery. Repeated queries are answered from memory, as the harness
/// cache does.
class ScriptedChannel final : public AgentChannel {
 public:
  ScriptedChannel(AgentChannel* services, const std::vector<Response>& answers)
      : services_(services), answers_(answers) {}

  std::vector<ActionHeader> headers() const override { return services_->headers(); }
  ObjectSet objects() const override { return services_->objects(); }
  Capability capability() const override { return services_->capability(); }

  Answer ask(const Query& query) override {
    if (auto it = seen_.find(query); it != seen_.end()) {
      return {answers_[it->second], it->second, true};
    }
    if (next_ == answers_.size()) throw PendingQuery{query};
    const Response& response = answers_[next_];
    const bool is_po = std::holds_alternative<ResponsePO>(response);
    if (is_po != (query.kind == QueryKind::kPlanOutcome)) {
      throw ProtocolError("answer " + std::to_string(next_) +
                          " does not match the kind of the query it answers");
    }
    seen_.emplace(query, next_);
    return {response, next_++, false};
  }

  std::vector<State> sample_states(std::size_t steps, std::uint64_t seed,
                                   std::size_t cap) override {
    return services_->sample_states(steps, seed, cap);
  }
  ReachOutcome reach(const std::set<Atom>& require_true,
                     const std::set<Atom>& require_false) override {
    return services_->reach(require_true, require_false);
  }

 private:
  AgentChannel* services_;
  const std::vector<Response>& answers_;
  std::map<Query, std::size_t> seen_;
  std::size_t next_ = 0;
};

}  // namespace

std::optional<Query> next_query(const InterrogationTask& task,
                                const std::vector<Response>& answers) {
  ScriptedChannel channel(task.agent, answers);
  InterrogationTask replay = task;
  replay.agent = &channel;
  try {
    learn(replay);
  } catch (const PendingQuery& pending) {
    return pending.query;
  }
  return std::nullopt;
}

double model_accuracy(const LearnedModel& learned, const LiftedModel& truth) {
  check_vocabulary(learned.model, truth);
  const auto reference = palm_tuples_of(truth);
  if (reference.empty()) return 1.0;
  std::size_t correct = 0;
  for (const auto& tuple : reference) {
    auto it = learned.tuples.find(tuple.key());
    if (it != learned.tuples.end() && it->second.mode == tuple.mode) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(reference.size());
}

double model_accuracy(const LiftedModel& learned, const LiftedModel& truth) {
  check_vocabulary(learned, truth);
  const auto reference = palm_tuples_of(truth);
  if (reference.empty()) return 1.0;
  const auto candidate = palm_tuples_of(learned);
  std::size_t correct = 0;
  for (const auto& tuple : reference) correct += candidate.contains(tuple);
  return static_cast<double>(correct) / static_cast<double>(reference.size());
}

std::vector<AccuracyPoint> accuracy_trace(const LearnedModel& learned,
                                          const LiftedModel& truth,
                                          const QueryLog& log) {
  check_vocabulary(learned.model, truth);
  const auto reference = palm_tuples_of(truth);
  std::vector<std::size_t> fixed_at;
  for (const auto& tuple : reference) {
    auto it = learned.tuples.find(tuple.key());
    if (it == learned.tuples.end() || it->second.mode != tuple.mode ||
        it->second.support.empty()) {
      continue;
    }
    fixed_at.push_back(*std::max_element(it->second.support.begin(),
                                         it->second.support.end()));
  }
  std::sort(fixed_at.begin(), fixed_at.end());
  std::vector<AccuracyPoint> trace;
  const double total = reference.empty() ? 1.0 : static_cast<double>(reference.size());
  auto next = fixed_at.begin();
  for (std::size_t i = 0; i < log.size(); ++i) {
    while (next != fixed_at.end() && *next <= i) ++next;
    const double correct = static_cast<double>(next - fixed_at.begin());
    trace.push_back({i, reference.empty() ? 1.0 : correct / total,
                     log.entries()[i].query.kind});
  }
  return trace;
}

}  // namespace agentprobe
