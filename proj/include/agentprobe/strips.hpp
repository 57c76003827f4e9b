// STRIPS-like action models: lifted schemas, ground semantics and palm tuples.
#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agentprobe {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, action or state that violates a well-formedness rule.
class ModelError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kRootType = "object";

/// An atom p(a1,...,ak). Lifted atoms carry `?`-prefixed parameter names as
/// arguments, ground atoms carry object names.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;
};

struct Literal {
  Atom atom;
  bool positive = true;

  auto operator<=>(const Literal&) const = default;
  bool operator==(const Literal&) const = default;
};

/// A typed name: an action parameter (`?t - truck`) or an object (`t1 - truck`).
struct TypedName {
  std::string name;
  std::string type{kRootType};

  auto operator<=>(const TypedName&) const = default;
  bool operator==(const TypedName&) const = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> param_types;

  std::size_t arity() const { return param_types.size(); }
  auto operator<=>(const PredicateDecl&) const = default;
  bool operator==(const PredicateDecl&) const = default;
};

struct ActionHeader {
  std::string name;
  std::vector<TypedName> params;

  auto operator<=>(const ActionHeader&) const = default;
  bool operator==(const ActionHeader&) const = default;
};

struct ActionSchema {
  ActionHeader header;
  std::set<Literal> pre;
  std::set<Literal> eff;

  const std::string& name() const { return header.name; }
  auto operator<=>(const ActionSchema&) const = default;
  bool operator==(const ActionSchema&) const = default;
};

/// M = <P, A>. Predicates, actions and types are kept sorted by name so that
/// structurally equal models compare equal.
struct LiftedModel {
  std::string name;
  std::vector<std::string> types;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;

  const ActionSchema* find_action(std::string_view action) const;
  const PredicateDecl* find_predicate(std::string_view predicate) const;
  std::vector<ActionHeader> headers() const;
  bool typed() const { return !types.empty(); }

  bool operator==(const LiftedModel&) const = default;
};

/// Closed-world state: atoms not present are false.
class State {
 public:
  State() = default;
  explicit State(std::set<Atom> atoms) : atoms_(std::move(atoms)) {}
  State(std::initializer_list<Atom> atoms) : atoms_(atoms) {}

  bool contains(const Atom& atom) const { return atoms_.contains(atom); }
  void insert(Atom atom) { atoms_.insert(std::move(atom)); }
  void erase(const Atom& atom) { atoms_.erase(atom); }
  void set(const Atom& atom, bool value) {
    if (value) {
      atoms_.insert(atom);
    } else {
      atoms_.erase(atom);
    }
  }
  const std::set<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  auto operator<=>(const State&) const = default;
  bool operator==(const State&) const = default;

 private:
  std::set<Atom> atoms_;
};

struct GroundAction {
  std::string name;
  std::vector<std::string> args;

  auto operator<=>(const GroundAction&) const = default;
  bool operator==(const GroundAction&) const = default;
};

using Plan = std::vector<GroundAction>;
using ObjectSet = std::vector<TypedName>;
/// Parameter name -> object name.
using Binding = std::map<std::string, std::string>;

struct ProblemInstance {
  std::string name;
  std::string domain;
  ObjectSet objects;
  State init;
  std::set<Literal> goal;

  bool operator==(const ProblemInstance&) const = default;
};

enum class Location { kPre, kEff };
enum class Mode { kPositive, kNegative, kAbsent };

/// Identifies one slot of a model: (atom over the action's parameters, action,
/// location). A palm tuple assigns it a mode.
struct PalmKey {
  Atom atom;
  std::string action;
  Location location = Location::kPre;

  auto operator<=>(const PalmKey&) const = default;
  bool operator==(const PalmKey&) const = default;
};

struct PalmTuple {
  Atom atom;
  std::string action;
  Location location = Location::kPre;
  Mode mode = Mode::kAbsent;

  PalmKey key() const { return {atom, action, location}; }
  auto operator<=>(const PalmTuple&) const = default;
  bool operator==(const PalmTuple&) const = default;
};

// Text forms used in logs, diagnostics and CSV output.
std::string to_string(const Atom& atom);
std::string to_string(const Literal& literal);
std::string to_string(const GroundAction& action);
std::string to_string(const State& state);
std::string to_string(const Plan& plan);
std::string to_string(Location location);
std::string to_string(Mode mode);
std::string to_string(const PalmTuple& tuple);

/// A value of `param_type` may fill a slot declared as `slot_type`.
bool type_compatible(std::string_view param_type, std::string_view slot_type);

/// P*(a): every atom obtained by substituting header parameters (repetition
/// allowed) into each predicate, respecting parameter types. Sorted.
std::vector<Atom> instantiate_with_parameters(
    const std::vector<PredicateDecl>& predicates, const ActionHeader& header);

/// Size of the instantiated-predicate vocabulary: the union over actions of
/// their repetition-free instantiations, with each action's parameters renamed
/// positionally per type (first room, second room, ...).
std::size_t instantiated_vocabulary_size(
    const std::vector<PredicateDecl>& predicates,
    const std::vector<ActionHeader>& headers);

Atom substitute(const Atom& atom, const Binding& binding);
Literal substitute(const Literal& literal, const Binding& binding);

/// Binds header parameters to the arguments of `action`. Throws ModelError on
/// arity mismatch.
Binding bind(const ActionHeader& header, const GroundAction& action);

/// Preconditions and effects of a schema instantiated for one ground action.
struct GroundOperator {
  GroundAction action;
  std::vector<Atom> pre_pos;
  std::vector<Atom> pre_neg;
  std::vector<Atom> add;
  std::vector<Atom> del;

  bool applicable(const State& state) const;
  /// (state \ del) u add. Does not check applicability.
  State successor(const State& state) const;
};

GroundOperator ground_operator(const LiftedModel& model,
                               const GroundAction& action);

bool check_preconditions(const LiftedModel& model, const State& state,
                         const GroundAction& action);

struct Transition {
  State state;
  bool success = false;
};

/// Failed actions leave the state unchanged.
Transition apply_action(const LiftedModel& model, const State& state,
                        const GroundAction& action);

struct Execution {
  std::size_t length = 0;  // longest successfully executed prefix
  State state;             // state after that prefix
};

Execution execute_plan(const LiftedModel& model, const State& initial,
                       const Plan& plan);

struct Grounding {
  std::vector<Atom> atoms;            // sorted
  std::vector<GroundAction> actions;  // sorted
};

Grounding ground_model(const LiftedModel& model, const ObjectSet& objects);

/// Ground atoms of `predicate` over `objects`, respecting slot types.
std::vector<Atom> ground_atoms(const PredicateDecl& predicate,
                               const ObjectSet& objects);
std::vector<GroundAction> ground_actions(const ActionHeader& header,
                                         const ObjectSet& objects);

/// Predicates that appear in no action's effects.
std::set<std::string> static_predicates(const LiftedModel& model);

std::set<PalmTuple> palm_tuples_of(const LiftedModel& model);

/// Inverse of palm_tuples_of: rebuilds pre/eff of `skeleton`'s actions from
/// non-absent tuples. Existing pre/eff sets of the skeleton are discarded.
LiftedModel model_from_palm_tuples(LiftedModel skeleton,
                                   const std::set<PalmTuple>& tuples);

/// Throws ModelError naming the first violated invariant.
void validate(const LiftedModel& model);
void validate(const LiftedModel& model, const ProblemInstance& problem);
void validate_ground_atom(const LiftedModel& model, const ObjectSet& objects,
                          const Atom& atom);
void validate_ground_action(const LiftedModel& model, const ObjectSet& objects,
                            const GroundAction& action);

/// Copy of `model` with every pre/eff set cleared. What an interrogator knows.
LiftedModel skeleton_of(const LiftedModel& model);

/// The predicate vocabulary a learner is given, with the naming and typing
/// context its output model is expressed in.
struct Vocabulary {
  std::string name;
  std::vector<std::string> types;
  std::vector<PredicateDecl> predicates;
};

Vocabulary vocabulary_of(const LiftedModel& model);

/// Model over `vocabulary` whose actions have the given headers and empty
/// pre/eff sets.
LiftedModel skeleton_from(const Vocabulary& vocabulary,
                          const std::vector<ActionHeader>& headers);

}  // namespace agentprobe
