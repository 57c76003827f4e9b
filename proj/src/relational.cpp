#include "agentprobe/relational.hpp"

#include <algorithm>

#include "agentprobe/lifting.hpp"

namespace agentprobe {
namespace {

struct OperatorMasks {
  StateId pre_pos = 0;
  StateId pre_neg = 0;
  StateId add = 0;
  StateId del = 0;
};

StateId mask_of(const TransitionTables& tables, const std::vector<Atom>& atoms) {
  StateId mask = 0;
  for (const auto& atom : atoms) {
    auto it = std::lower_bound(tables.atoms.begin(), tables.atoms.end(), atom);
    mask |= StateId{1} << (it - tables.atoms.begin());
  }
  return mask;
}

}  // namespace

std::optional<StateId> TransitionTables::state_index(const State& state) const {
  StateId id = 0;
  for (const auto& atom : state.atoms()) {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), atom);
    if (it == atoms.end() || *it != atom) return std::nullopt;
    id |= StateId{1} << (it - atoms.begin());
  }
  return id;
}

State TransitionTables::state_at(StateId id) const {
  State state;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (id & (StateId{1} << i)) state.insert(atoms[i]);
  }
  return state;
}

std::optional<ActionId> TransitionTables::action_index(
    const GroundAction& action) const {
  auto it = std::lower_bound(actions.begin(), actions.end(), action);
  if (it == actions.end() || *it != action) return std::nullopt;
  return static_cast<ActionId>(it - actions.begin());
}

TransitionTables build_transition_tables(const LiftedModel& model,
                                         const ProblemInstance& problem,
                                         std::size_t max_plan_length,
                                         std::size_t max_atoms) {
  Grounding grounding = ground_model(model, problem.objects);
  if (grounding.atoms.size() > max_atoms) {
    throw BudgetExceeded("relational backend refuses " +
                         std::to_string(grounding.atoms.size()) +
                         " ground atoms (budget " + std::to_string(max_atoms) +
                         ")");
  }
  TransitionTables tables;
  tables.atoms = std::move(grounding.atoms);
  tables.actions = std::move(grounding.actions);
  tables.headers = model.headers();
  tables.objects = problem.objects;
  tables.max_plan_length = max_plan_length;

  std::vector<OperatorMasks> masks;
  for (const auto& action : tables.actions) {
    GroundOperator op = ground_operator(model, action);
    masks.push_back({mask_of(tables, op.pre_pos), mask_of(tables, op.pre_neg),
                     mask_of(tables, op.add), mask_of(tables, op.del)});
  }

  const std::size_t states = tables.state_count();
  const std::size_t actions = tables.actions.size();
  tables.r.resize(2 * states * actions);
  for (StateId s = 0; s < states; ++s) {
    for (ActionId a = 0; a < actions; ++a) {
      tables.r[tables.row_index(false, s, a)] = {false, s, a, s, false};
      const OperatorMasks& m = masks[a];
      const bool applicable =
          (s & m.pre_pos) == m.pre_pos && (s & m.pre_neg) == 0;
      const StateId next = applicable ? ((s & ~m.del) | m.add) : s;
      tables.r[tables.row_index(true, s, a)] = {true, s, a, next, applicable};
    }
  }

  for (bool valid : {false, true}) {
    for (std::size_t count = 0; count <= max_plan_length; ++count) {
      tables.n.push_back({valid, count, valid ? count + 1 : count});
    }
  }

  for (std::uint32_t p = 0; p < tables.atoms.size(); ++p) {
    for (StateId s = 0; s < states; ++s) {
      if (s & (StateId{1} << p)) tables.s_rel.push_back({p, s});
    }
  }
  return tables;
}

ResponsePO relational_answer_po(const TransitionTables& tables,
                                const Query& query) {
  if (query.plan.size() > tables.max_plan_length) {
    throw ProtocolError("plan longer than the tables' maximum length");
  }
  auto s0 = tables.state_index(query.initial);
  if (!s0) {
    throw ProtocolError("initial state outside the relational universe: {" +
                        to_string(query.initial) + "}");
  }
  std::vector<ActionId> plan;
  for (const auto& action : query.plan) {
    auto id = tables.action_index(action);
    if (!id) throw ProtocolError("unknown ground action " + to_string(action));
    plan.push_back(*id);
  }

  // alpha_i holds the bindings of the live variables after step i. The
  // bindings are functional, so each alpha_i has exactly one tuple.
  struct Live {
    bool succ;
    StateId s;
    std::size_t n;
  };
  std::vector<Live> alpha{{true, *s0, 0}};
  for (ActionId a : plan) {
    std::vector<Live> next;
    for (const Live& t : alpha) {
      const TransitionRow& r = tables.r_row(t.succ, t.s, a);
      const CounterRow& c = tables.n_row(r.succ, t.n);
      next.push_back({r.succ, r.s_next, c.n_next});
    }
    alpha = std::move(next);
  }
  return {alpha.front().n, tables.state_at(alpha.front().s)};
}

std::set<Literal> relational_ground_preconditions(const TransitionTables& tables,
                                                  ActionId action) {
  const std::size_t states = tables.state_count();
  auto executes = [&](StateId s) { return tables.r_row(true, s, action).succ; };

  bool executable_somewhere = false;
  for (StateId s = 0; s < states && !executable_somewhere; ++s) {
    executable_somewhere = executes(s);
  }
  if (!executable_somewhere) return {unsatisfiable_literal()};

  std::vector<std::vector<bool>> member(
      tables.atoms.size(), std::vector<bool>(states, false));
  for (const MembershipRow& row : tables.s_rel) member[row.p][row.s] = true;

  std::set<Literal> pre;
  for (std::uint32_t p = 0; p < tables.atoms.size(); ++p) {
    bool every_lacking_fails = true;
    bool every_holding_fails = true;
    for (StateId s = 0; s < states; ++s) {
      if (!executes(s)) continue;
      if (member[p][s]) {
        every_holding_fails = false;
      } else {
        every_lacking_fails = false;
      }
    }
    if (every_lacking_fails) pre.insert({tables.atoms[p], true});
    if (every_holding_fails) pre.insert({tables.atoms[p], false});
  }
  return pre;
}

std::set<Literal> relational_answer_ap(const TransitionTables& tables,
                                       const std::string& schema) {
  auto header = std::find_if(tables.headers.begin(), tables.headers.end(),
                             [&](const ActionHeader& h) { return h.name == schema; });
  if (header == tables.headers.end()) {
    throw ProtocolError("unknown action schema '" + schema + "'");
  }
  auto grounding = canonical_grounding(*header, tables.objects);
  if (!grounding) {
    throw Error("no injective grounding of '" + schema + "' over the objects");
  }
  auto id = tables.action_index(grounding->action);
  std::set<Literal> ground = relational_ground_preconditions(tables, *id);
  if (ground.contains(unsatisfiable_literal())) return ground;
  return lift_to_schema(ground, *grounding);
}

RelationalResponder::RelationalResponder(TransitionTables tables)
    : tables_(std::move(tables)) {
  for (const auto& header : tables_.headers) {
    preconditions_[header.name] = relational_answer_ap(tables_, header.name);
  }
}

ResponsePO RelationalResponder::answer_po(const State& initial,
                                          const Plan& plan) const {
  return relational_answer_po(tables_, {QueryKind::kPlanOutcome, initial, plan});
}

ResponseAP RelationalResponder::answer_ap(const State& initial,
                                          const Plan& plan) const {
  ResponsePO outcome = answer_po(initial, plan);
  ResponseAP response;
  response.length = outcome.length;
  if (outcome.length < plan.size()) {
    response.failed_action = plan[outcome.length].name;
    response.failed_preconditions = preconditions_.at(response.failed_action);
  } else {
    response.failed_action = std::string(kFailAction);
    response.failed_preconditions = {unsatisfiable_literal()};
    response.final_state = std::move(outcome.state);
  }
  return response;
}

std::unique_ptr<AgentHarness> make_relational_agent(const LiftedModel& hidden,
                                                    const ProblemInstance& problem,
                                                    HarnessConfig config) {
  auto tables = build_transition_tables(hidden, problem, config.max_plan_length);
  return std::make_unique<AgentHarness>(
      hidden, problem, std::make_unique<RelationalResponder>(std::move(tables)),
      config);
}

}  // namespace agentprobe
