// An agent whose knowledge is a set of relational tables (transitions R, step
// counter N, state membership S) and which answers queries by evaluating
// join chains and universal scans over them.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentprobe/agent.hpp"
#include "agentprobe/strips.hpp"

namespace agentprobe {

/// Requested state universe is larger than the relational backend accepts.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kDefaultRelationalAtomBudget = 16;

/// States are bitmasks over `atoms`: bit i set iff atoms[i] holds.
using StateId = std::uint32_t;
using ActionId = std::uint32_t;

struct TransitionRow {
  bool valid = true;
  StateId s = 0;
  ActionId a = 0;
  StateId s_next = 0;
  bool succ = false;
};

struct CounterRow {
  bool valid = true;
  std::size_t n = 0;
  std::size_t n_next = 0;
};

struct MembershipRow {
  std::uint32_t p = 0;  // index into atoms
  StateId s = 0;
};

struct TransitionTables {
  std::vector<Atom> atoms;             // sorted ground atoms
  std::vector<GroundAction> actions;   // sorted ground actions
  std::vector<ActionHeader> headers;
  ObjectSet objects;
  std::size_t max_plan_length = 0;

  std::vector<TransitionRow> r;  // indexed by row_index(valid, s, a)
  std::vector<CounterRow> n;     // indexed by valid * (L + 1) + n
  std::vector<MembershipRow> s_rel;

  std::size_t state_count() const { return std::size_t{1} << atoms.size(); }
  std::size_t row_index(bool valid, StateId s, ActionId a) const {
    return (valid ? state_count() * actions.size() : 0) + s * actions.size() + a;
  }
  const TransitionRow& r_row(bool valid, StateId s, ActionId a) const {
    return r[row_index(valid, s, a)];
  }
  const CounterRow& n_row(bool valid, std::size_t count) const {
    return n[(valid ? max_plan_length + 1 : 0) + count];
  }

  std::optional<StateId> state_index(const State& state) const;
  State state_at(StateId id) const;
  std::optional<ActionId> action_index(const GroundAction& action) const;
};

/// Enumerates the full state powerset. Throws BudgetExceeded when the problem
/// has more than `max_atoms` ground atoms.
TransitionTables build_transition_tables(
    const LiftedModel& model, const ProblemInstance& problem,
    std::size_t max_plan_length,
    std::size_t max_atoms = kDefaultRelationalAtomBudget);

/// Iterated join over R and N carrying (succ, s, n) per step.
/// Throws ProtocolError for states or actions outside the tables.
ResponsePO relational_answer_po(const TransitionTables& tables,
                                const Query& query);

/// Ground precondition literals of one ground action found by scanning R over
/// every state. An action that never executes yields the unsatisfiable literal.
std::set<Literal> relational_ground_preconditions(const TransitionTables& tables,
                                                  ActionId action);

/// Lifted precondition set of `schema`, scanned at its canonical grounding.
std::set<Literal> relational_answer_ap(const TransitionTables& tables,
                                       const std::string& schema);

/// Responder backed by transition tables. Precondition sets are computed once
/// per schema at construction.
class RelationalResponder final : public Responder {
 public:
  explicit RelationalResponder(TransitionTables tables);
  ResponsePO answer_po(const State& initial, const Plan& plan) const override;
  ResponseAP answer_ap(const State& initial, const Plan& plan) const override;
  const TransitionTables& tables() const { return tables_; }

 private:
  TransitionTables tables_;
  std::map<std::string, std::set<Literal>> preconditions_;
};

std::unique_ptr<AgentHarness> make_relational_agent(const LiftedModel& hidden,
                                                    const ProblemInstance& problem,
                                                    HarnessConfig config = {});

}  // namespace agentprobe
