// Time-indexed causal networks over ground atoms, decisions and
// executability variables: construction, interventions, evaluation and
// actual-cause checks by enumeration.
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agentprobe/strips.hpp"

namespace agentprobe {

enum class NodeKind { kState, kDecision, kExecutable };

using NodeId = std::size_t;

struct Node {
  NodeKind kind = NodeKind::kState;
  std::size_t index = 0;  // into Dcdn::atoms or Dcdn::actions
  std::size_t time = 0;
  bool exogenous = false;
  std::string name;  // atom@t, dec:action@t, X:action@t
};

/// Nodes are stored in a topological order: for each step t the state layer,
/// then the decisions, then the executability variables; the final state
/// layer comes last.
struct Dcdn {
  std::size_t horizon = 0;
  std::vector<Atom> atoms;
  std::vector<GroundOperator> operators;
  std::set<std::string> static_predicates;
  std::vector<Node> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;  // sorted
  std::vector<std::vector<NodeId>> parents;
  std::vector<std::vector<NodeId>> children;

  NodeId state_node(std::size_t atom, std::size_t t) const;
  NodeId decision_node(std::size_t action, std::size_t t) const;
  NodeId executable_node(std::size_t action, std::size_t t) const;
  std::optional<NodeId> find(const std::string& name) const;
  NodeId node(const std::string& name) const;  // throws Error if absent
  std::optional<std::size_t> atom_index(const Atom& atom) const;
  std::optional<std::size_t> action_index(const GroundAction& action) const;

  std::set<NodeId> ancestors(const std::set<NodeId>& of) const;    // inclusive
  std::set<NodeId> descendants(const std::set<NodeId>& of) const;  // inclusive

 private:
  friend Dcdn build_dcdn(const LiftedModel&, const ProblemInstance&, std::size_t);
  std::map<std::string, NodeId> by_name_;
};

/// Throws Error when horizon is 0.
Dcdn build_dcdn(const LiftedModel& model, const ProblemInstance& problem,
                std::size_t horizon);

/// A network, a context (the state at t = 0, which fixes every exogenous
/// node) and a planned decision sequence, plus any interventions applied.
struct CausalSetting {
  std::shared_ptr<const Dcdn> network;
  State context;
  Plan decisions;
  std::map<NodeId, bool> fixed;  // intervened variables
};

/// Throws Error if the context mentions unknown atoms or the plan is longer
/// than the horizon or uses unknown actions.
CausalSetting make_setting(std::shared_ptr<const Dcdn> network, State context,
                           Plan decisions);

enum class InterventionKind {
  kState,     // set state variables at t = 0
  kDecision,  // force decision variables
};

struct InterventionSpec {
  InterventionKind kind = InterventionKind::kDecision;
  std::vector<std::pair<std::string, bool>> assignments;  // node name, value
};

/// Submodel with the listed endogenous variables replaced by constants.
/// Throws Error for exogenous targets.
CausalSetting intervene(const CausalSetting& setting,
                        const std::map<NodeId, bool>& assignments);
/// Additionally enforces the kind: decisions only for kDecision, non-static
/// state nodes at t = 0 only for kState.
CausalSetting intervene(const CausalSetting& setting, const InterventionSpec& spec);

using Valuation = std::vector<bool>;  // indexed by NodeId

/// Evaluates every node in topological order. Throws Error when more than one
/// decision or executability variable is true in one step.
Valuation evaluate(const CausalSetting& setting);

/// State at layer t of a valuation.
State layer_state(const Dcdn& network, const Valuation& values, std::size_t t);

/// Boolean combination of primitive events node = value.
class CausalFormula {
 public:
  static CausalFormula event(NodeId node, bool value);
  static CausalFormula negation(CausalFormula inner);
  static CausalFormula conjunction(std::vector<CausalFormula> parts);

  bool holds(const Valuation& values) const;
  std::set<NodeId> variables() const;
  std::string describe(const Dcdn& network) const;

 private:
  enum class Op { kEvent, kNot, kAnd };
  Op op_ = Op::kEvent;
  NodeId node_ = 0;
  bool value_ = true;
  std::vector<CausalFormula> parts_;
};

enum class CauseStatus { kCause, kNotCause, kInconclusive };

std::string to_string(CauseStatus status);

struct CauseWitness {
  std::map<NodeId, bool> alternative;  // x'
  std::map<NodeId, bool> held;         // W at its actual values
};

struct CauseVerdict {
  CauseStatus status = CauseStatus::kNotCause;
  bool ac1 = false;
  bool ac2 = false;
  bool ac3 = false;
  std::optional<CauseWitness> witness;
  std::string reason;
};

/// Largest contingency candidate set enumerated before giving up.
inline constexpr std::size_t kMaxContingencyVariables = 24;

/// Contingencies whose submodel has two actions in one step are not
/// admissible worlds and are skipped.
CauseVerdict is_actual_cause(const CausalSetting& setting,
                             const std::map<NodeId, bool>& candidate,
                             const CausalFormula& phi,
                             std::size_t max_contingency = kMaxContingencyVariables);

struct SoundnessReport {
  std::set<PalmTuple> spurious;
  std::set<PalmTuple> missing;
  bool sound() const { return spurious.empty(); }
  bool complete() const { return missing.empty(); }
};

/// Throws Error when predicates or action headers differ.
SoundnessReport compare_sound_complete(const LiftedModel& candidate,
                                       const LiftedModel& reference);

std::string export_dot(const Dcdn& network);

/// One row of the standard cause-check family over an executed plan.
struct CauseCheck {
  std::string family;  // precondition, executability, decision, static
  std::string cause;
  std::string effect;
  bool expected_cause = true;
  CauseVerdict verdict;
  bool passed() const;
};

/// For every step of the plan that executes: each precondition atom against
/// X, X and the decision against each effect atom, and each static atom
/// against X.
std::vector<CauseCheck> standard_cause_checks(const CausalSetting& setting);

}  // namespace agentprobe
