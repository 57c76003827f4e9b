#include "agentprobe/strips.hpp"

#include <algorithm>
#include <functional>
#include <utility>

namespace agentprobe {

namespace {

template <typename Range, typename Fn>
std::string join(const Range& items, std::string_view sep, Fn&& fn) {
  std::string out;
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += sep;
    first = false;
    out += fn(item);
  }
  return out;
}

// Calls `visit` with every tuple of `choices[0] x choices[1] x ...`.
void for_each_product(
    const std::vector<std::vector<std::string>>& choices,
    const std::function<void(const std::vector<std::string>&)>& visit) {
  for (const auto& c : choices) {
    if (c.empty()) return;
  }
  std::vector<std::size_t> index(choices.size(), 0);
  std::vector<std::string> tuple(choices.size());
  while (true) {
    for (std::size_t i = 0; i < choices.size(); ++i) tuple[i] = choices[i][index[i]];
    visit(tuple);
    std::size_t pos = choices.size();
    while (pos > 0) {
      --pos;
      if (++index[pos] < choices[pos].size()) break;
      index[pos] = 0;
      if (pos == 0) return;
    }
    if (choices.empty()) return;
  }
}

bool has_duplicates(const std::vector<std::string>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (values[i] == values[j]) return true;
    }
  }
  return false;
}

std::vector<Atom> instantiate(const std::vector<PredicateDecl>& predicates,
                              const std::vector<TypedName>& params,
                              bool allow_repetition) {
  std::set<Atom> result;
  for (const auto& predicate : predicates) {
    std::vector<std::vector<std::string>> choices;
    for (const auto& slot : predicate.param_types) {
      std::vector<std::string> fits;
      for (const auto& p : params) {
        if (type_compatible(p.type, slot)) fits.push_back(p.name);
      }
      choices.push_back(std::move(fits));
    }
    for_each_product(choices, [&](const std::vector<std::string>& args) {
      if (!allow_repetition && has_duplicates(args)) return;
      result.insert(Atom{predicate.name, args});
    });
  }
  return {result.begin(), result.end()};
}

const ActionSchema& require_action(const LiftedModel& model,
                                   std::string_view name) {
  const ActionSchema* schema = model.find_action(name);
  if (schema == nullptr) {
    throw ModelError("unknown action '" + std::string(name) + "'");
  }
  return *schema;
}

bool declared_type(const LiftedModel& model, std::string_view type) {
  return type == kRootType ||
         std::find(model.types.begin(), model.types.end(), type) !=
             model.types.end();
}

void validate_literal(const LiftedModel& model, const ActionSchema& schema,
                      const Literal& literal, std::string_view where) {
  const auto context = "action '" + schema.name() + "' " + std::string(where) +
                       " literal " + to_string(literal) + ": ";
  const PredicateDecl* predicate = model.find_predicate(literal.atom.predicate);
  if (predicate == nullptr) {
    throw ModelError(context + "undeclared predicate");
  }
  if (predicate->arity() != literal.atom.args.size()) {
    throw ModelError(context + "arity mismatch, expected " +
                     std::to_string(predicate->arity()));
  }
  for (std::size_t i = 0; i < literal.atom.args.size(); ++i) {
    const auto& arg = literal.atom.args[i];
    auto it = std::find_if(schema.header.params.begin(),
                           schema.header.params.end(),
                           [&](const TypedName& p) { return p.name == arg; });
    if (it == schema.header.params.end()) {
      throw ModelError(context + "'" + arg + "' is not a parameter");
    }
    if (!type_compatible(it->type, predicate->param_types[i])) {
      throw ModelError(context + "parameter '" + arg + "' of type '" +
                       it->type + "' does not fit slot of type '" +
                       predicate->param_types[i] + "'");
    }
  }
}

void check_polarity_conflicts(const ActionSchema& schema,
                              const std::set<Literal>& literals,
                              std::string_view where) {
  for (const auto& literal : literals) {
    if (literal.positive && literals.contains(Literal{literal.atom, false})) {
      throw ModelError("action '" + schema.name() + "' " + std::string(where) +
                       " contains both polarities of " +
                       to_string(literal.atom));
    }
  }
}

}  // namespace

const ActionSchema* LiftedModel::find_action(std::string_view action) const {
  for (const auto& a : actions) {
    if (a.name() == action) return &a;
  }
  return nullptr;
}

const PredicateDecl* LiftedModel::find_predicate(
    std::string_view predicate) const {
  for (const auto& p : predicates) {
    if (p.name == predicate) return &p;
  }
  return nullptr;
}

std::vector<ActionHeader> LiftedModel::headers() const {
  std::vector<ActionHeader> out;
  out.reserve(actions.size());
  for (const auto& a : actions) out.push_back(a.header);
  return out;
}

std::string to_string(const Atom& atom) {
  if (atom.args.empty()) return atom.predicate;
  return atom.predicate + "(" +
         join(atom.args, ",", [](const std::string& s) { return s; }) + ")";
}

std::string to_string(const Literal& literal) {
  return (literal.positive ? "" : "!") + to_string(literal.atom);
}

std::string to_string(const GroundAction& action) {
  return to_string(Atom{action.name, action.args});
}

std::string to_string(const State& state) {
  return join(state.atoms(), " ", [](const Atom& a) { return to_string(a); });
}

std::string to_string(const Plan& plan) {
  return join(plan, " ", [](const GroundAction& a) { return to_string(a); });
}

std::string to_string(Location location) {
  return location == Location::kPre ? "pre" : "eff";
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kPositive:
      return "+";
    case Mode::kNegative:
      return "-";
    case Mode::kAbsent:
      break;
  }
  return "absent";
}

std::string to_string(const PalmTuple& tuple) {
  return "(" + to_string(tuple.atom) + ", " + tuple.action + ", " +
         to_string(tuple.location) + ", " + to_string(tuple.mode) + ")";
}

bool type_compatible(std::string_view param_type, std::string_view slot_type) {
  return slot_type == kRootType || param_type == slot_type;
}

std::vector<Atom> instantiate_with_parameters(
    const std::vector<PredicateDecl>& predicates, const ActionHeader& header) {
  return instantiate(predicates, header.params, /*allow_repetition=*/true);
}

std::size_t instantiated_vocabulary_size(
    const std::vector<PredicateDecl>& predicates,
    const std::vector<ActionHeader>& headers) {
  std::set<Atom> vocabulary;
  for (const auto& header : headers) {
    std::map<std::string, int> seen;
    std::vector<TypedName> positional;
    for (const auto& p : header.params) {
      positional.push_back(
          {p.type + "#" + std::to_string(++seen[p.type]), p.type});
    }
    for (auto& atom : instantiate(predicates, positional, false)) {
      vocabulary.insert(std::move(atom));
    }
  }
  return vocabulary.size();
}

Atom substitute(const Atom& atom, const Binding& binding) {
  Atom out{atom.predicate, {}};
  out.args.reserve(atom.args.size());
  for (const auto& arg : atom.args) {
    auto it = binding.find(arg);
    out.args.push_back(it == binding.end() ? arg : it->second);
  }
  return out;
}

Literal substitute(const Literal& literal, const Binding& binding) {
  return {substitute(literal.atom, binding), literal.positive};
}

Binding bind(const ActionHeader& header, const GroundAction& action) {
  if (header.params.size() != action.args.size()) {
    throw ModelError("ground action " + to_string(action) + " has " +
                     std::to_string(action.args.size()) +
                     " arguments, schema '" + header.name + "' expects " +
                     std::to_string(header.params.size()));
  }
  Binding binding;
  for (std::size_t i = 0; i < header.params.size(); ++i) {
    binding[header.params[i].name] = action.args[i];
  }
  return binding;
}

bool GroundOperator::applicable(const State& state) const {
  return std::all_of(pre_pos.begin(), pre_pos.end(),
                     [&](const Atom& a) { return state.contains(a); }) &&
         std::none_of(pre_neg.begin(), pre_neg.end(),
                      [&](const Atom& a) { return state.contains(a); });
}

State GroundOperator::successor(const State& state) const {
  State next = state;
  for (const auto& a : del) next.erase(a);
  for (const auto& a : add) next.insert(a);
  return next;
}

GroundOperator ground_operator(const LiftedModel& model,
                               const GroundAction& action) {
  const ActionSchema& schema = require_action(model, action.name);
  const Binding binding = bind(schema.header, action);
  GroundOperator op{action, {}, {}, {}, {}};
  for (const auto& lit : schema.pre) {
    (lit.positive ? op.pre_pos : op.pre_neg)
        .push_back(substitute(lit.atom, binding));
  }
  for (const auto& lit : schema.eff) {
    (lit.positive ? op.add : op.del).push_back(substitute(lit.atom, binding));
  }
  return op;
}

bool check_preconditions(const LiftedModel& model, const State& state,
                         const GroundAction& action) {
  return ground_operator(model, action).applicable(state);
}

Transition apply_action(const LiftedModel& model, const State& state,
                        const GroundAction& action) {
  const GroundOperator op = ground_operator(model, action);
  if (!op.applicable(state)) return {state, false};
  return {op.successor(state), true};
}

Execution execute_plan(const LiftedModel& model, const State& initial,
                       const Plan& plan) {
  Execution run{0, initial};
  for (const auto& step : plan) {
    Transition t = apply_action(model, run.state, step);
    if (!t.success) break;
    run.state = std::move(t.state);
    ++run.length;
  }
  return run;
}

std::vector<Atom> ground_atoms(const PredicateDecl& predicate,
                               const ObjectSet& objects) {
  std::vector<std::vector<std::string>> choices;
  for (const auto& slot : predicate.param_types) {
    std::vector<std::string> fits;
    for (const auto& o : objects) {
      if (type_compatible(o.type, slot)) fits.push_back(o.name);
    }
    choices.push_back(std::move(fits));
  }
  std::vector<Atom> out;
  for_each_product(choices, [&](const std::vector<std::string>& args) {
    out.push_back(Atom{predicate.name, args});
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GroundAction> ground_actions(const ActionHeader& header,
                                         const ObjectSet& objects) {
  std::vector<std::vector<std::string>> choices;
  for (const auto& p : header.params) {
    std::vector<std::string> fits;
    for (const auto& o : objects) {
      if (type_compatible(o.type, p.type)) fits.push_back(o.name);
    }
    choices.push_back(std::move(fits));
  }
  std::vector<GroundAction> out;
  for_each_product(choices, [&](const std::vector<std::string>& args) {
    out.push_back(GroundAction{header.name, args});
  });
  std::sort(out.begin(), out.end());
  return out;
}

Grounding ground_model(const LiftedModel& model, const ObjectSet& objects) {
  Grounding g;
  for (const auto& p : model.predicates) {
    auto atoms = ground_atoms(p, objects);
    g.atoms.insert(g.atoms.end(), atoms.begin(), atoms.end());
  }
  for (const auto& a : model.actions) {
    auto actions = ground_actions(a.header, objects);
    g.actions.insert(g.actions.end(), actions.begin(), actions.end());
  }
  std::sort(g.atoms.begin(), g.atoms.end());
  std::sort(g.actions.begin(), g.actions.end());
  return g;
}

std::set<std::string> static_predicates(const LiftedModel& model) {
  std::set<std::string> out;
  for (const auto& p : model.predicates) out.insert(p.name);
  for (const auto& a : model.actions) {
    for (const auto& lit : a.eff) out.erase(lit.atom.predicate);
  }
  return out;
}

std::set<PalmTuple> palm_tuples_of(const LiftedModel& model) {
  auto mode_in = [](const std::set<Literal>& literals, const Atom& atom) {
    if (literals.contains(Literal{atom, true})) return Mode::kPositive;
    if (literals.contains(Literal{atom, false})) return Mode::kNegative;
    return Mode::kAbsent;
  };
  std::set<PalmTuple> out;
  for (const auto& action : model.actions) {
    for (const auto& atom :
         instantiate_with_parameters(model.predicates, action.header)) {
      out.insert({atom, action.name(), Location::kPre, mode_in(action.pre, atom)});
      out.insert({atom, action.name(), Location::kEff, mode_in(action.eff, atom)});
    }
  }
  return out;
}

LiftedModel model_from_palm_tuples(LiftedModel skeleton,
                                   const std::set<PalmTuple>& tuples) {
  for (auto& action : skeleton.actions) {
    action.pre.clear();
    action.eff.clear();
  }
  for (const auto& t : tuples) {
    if (t.mode == Mode::kAbsent) continue;
    auto it = std::find_if(
        skeleton.actions.begin(), skeleton.actions.end(),
        [&](const ActionSchema& a) { return a.name() == t.action; });
    if (it == skeleton.actions.end()) {
      throw ModelError("palm tuple names unknown action '" + t.action + "'");
    }
    auto& target = t.location == Location::kPre ? it->pre : it->eff;
    target.insert(Literal{t.atom, t.mode == Mode::kPositive});
  }
  return skeleton;
}

void validate(const LiftedModel& model) {
  std::set<std::string> names;
  for (const auto& t : model.types) {
    if (!names.insert(t).second) throw ModelError("duplicate type '" + t + "'");
  }
  names.clear();
  for (const auto& p : model.predicates) {
    if (!names.insert(p.name).second) {
      throw ModelError("duplicate predicate '" + p.name + "'");
    }
    for (const auto& t : p.param_types) {
      if (!declared_type(model, t)) {
        throw ModelError("predicate '" + p.name + "' uses undeclared type '" +
                         t + "'");
      }
    }
  }
  names.clear();
  for (const auto& a : model.actions) {
    if (!names.insert(a.name()).second) {
      throw ModelError("duplicate action '" + a.name() + "'");
    }
    std::set<std::string> params;
    for (const auto& p : a.header.params) {
      if (!params.insert(p.name).second) {
        throw ModelError("action '" + a.name() + "' repeats parameter '" +
                         p.name + "'");
      }
      if (!declared_type(model, p.type)) {
        throw ModelError("action '" + a.name() + "' uses undeclared type '" +
                         p.type + "'");
      }
    }
    for (const auto& lit : a.pre) validate_literal(model, a, lit, "precondition");
    for (const auto& lit : a.eff) validate_literal(model, a, lit, "effect");
    check_polarity_conflicts(a, a.pre, "precondition");
    check_polarity_conflicts(a, a.eff, "effect");
    for (const auto& lit : a.eff) {
      if (a.pre.contains(lit)) {
        throw ModelError("action '" + a.name() + "' effect " + to_string(lit) +
                         " is already entailed by its precondition");
      }
    }
  }
}

void validate_ground_atom(const LiftedModel& model, const ObjectSet& objects,
                          const Atom& atom) {
  const PredicateDecl* p = model.find_predicate(atom.predicate);
  if (p == nullptr) {
    throw ModelError("atom " + to_string(atom) + " uses undeclared predicate");
  }
  if (p->arity() != atom.args.size()) {
    throw ModelError("atom " + to_string(atom) + " has wrong arity");
  }
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    auto it = std::find_if(objects.begin(), objects.end(), [&](const TypedName& o) {
      return o.name == atom.args[i];
    });
    if (it == objects.end()) {
      throw ModelError("atom " + to_string(atom) + " uses undeclared object '" +
                       atom.args[i] + "'");
    }
    if (!type_compatible(it->type, p->param_types[i])) {
      throw ModelError("atom " + to_string(atom) + ": object '" + it->name +
                       "' of type '" + it->type + "' does not fit '" +
                       p->param_types[i] + "'");
    }
  }
}

void validate_ground_action(const LiftedModel& model, const ObjectSet& objects,
                            const GroundAction& action) {
  const ActionSchema& schema = require_action(model, action.name);
  bind(schema.header, action);
  for (std::size_t i = 0; i < action.args.size(); ++i) {
    auto it = std::find_if(objects.begin(), objects.end(), [&](const TypedName& o) {
      return o.name == action.args[i];
    });
    if (it == objects.end()) {
      throw ModelError("action " + to_string(action) +
                       " uses undeclared object '" + action.args[i] + "'");
    }
    if (!type_compatible(it->type, schema.header.params[i].type)) {
      throw ModelError("action " + to_string(action) + ": object '" +
                       it->name + "' has incompatible type");
    }
  }
}

void validate(const LiftedModel& model, const ProblemInstance& problem) {
  std::set<std::string> names;
  for (const auto& o : problem.objects) {
    if (!names.insert(o.name).second) {
      throw ModelError("duplicate object '" + o.name + "'");
    }
    if (!declared_type(model, o.type)) {
      throw ModelError("object '" + o.name + "' has undeclared type '" +
                       o.type + "'");
    }
  }
  for (const auto& a : problem.init.atoms()) {
    validate_ground_atom(model, problem.objects, a);
  }
  for (const auto& lit : problem.goal) {
    validate_ground_atom(model, problem.objects, lit.atom);
  }
}

LiftedModel skeleton_of(const LiftedModel& model) {
  LiftedModel out = model;
  for (auto& a : out.actions) {
    a.pre.clear();
    a.eff.clear();
  }
  return out;
}

Vocabulary vocabulary_of(const LiftedModel& model) {
  return {model.name, model.types, model.predicates};
}

LiftedModel skeleton_from(const Vocabulary& vocabulary,
                          const std::vector<ActionHeader>& headers) {
  LiftedModel model{vocabulary.name, vocabulary.types, vocabulary.predicates, {}};
  for (const auto& header : headers) model.actions.push_back({header, {}, {}});
  std::sort(model.actions.begin(), model.actions.end(),
            [](const ActionSchema& a, const ActionSchema& b) { return a.name() < b.name(); });
  return model;
}

}  // namespace agentprobe
