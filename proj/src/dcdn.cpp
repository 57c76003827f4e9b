#include "agentprobe/dcdn.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace agentprobe {
namespace {

std::size_t layer_width(const Dcdn& net) {
  return net.atoms.size() + 2 * net.operators.size();
}

bool contains(const std::vector<Atom>& atoms, const Atom& atom) {
  return std::find(atoms.begin(), atoms.end(), atom) != atoms.end();
}

std::set<NodeId> closure(const std::set<NodeId>& start,
                         const std::vector<std::vector<NodeId>>& next) {
  std::set<NodeId> seen = start;
  std::deque<NodeId> frontier(start.begin(), start.end());
  while (!frontier.empty()) {
    NodeId n = frontier.front();
    frontier.pop_front();
    for (NodeId m : next[n]) {
      if (seen.insert(m).second) frontier.push_back(m);
    }
  }
  return seen;
}

}  // namespace

NodeId Dcdn::state_node(std::size_t atom, std::size_t t) const {
  return t * layer_width(*this) + atom;
}

NodeId Dcdn::decision_node(std::size_t action, std::size_t t) const {
  return t * layer_width(*this) + atoms.size() + action;
}

NodeId Dcdn::executable_node(std::size_t action, std::size_t t) const {
  return t * layer_width(*this) + atoms.size() + operators.size() + action;
}

std::optional<NodeId> Dcdn::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

NodeId Dcdn::node(const std::string& name) const {
  auto id = find(name);
  if (!id) throw Error("no node named '" + name + "' in the network");
  return *id;
}

std::optional<std::size_t> Dcdn::atom_index(const Atom& atom) const {
  auto it = std::lower_bound(atoms.begin(), atoms.end(), atom);
  if (it == atoms.end() || *it != atom) return std::nullopt;
  return static_cast<std::size_t>(it - atoms.begin());
}

std::optional<std::size_t> Dcdn::action_index(const GroundAction& action) const {
  auto it = std::lower_bound(
      operators.begin(), operators.end(), action,
      [](const GroundOperator& op, const GroundAction& a) { return op.action < a; });
  if (it == operators.end() || it->action != action) return std::nullopt;
  return static_cast<std::size_t>(it - operators.begin());
}

std::set<NodeId> Dcdn::ancestors(const std::set<NodeId>& of) const {
  return closure(of, parents);
}

std::set<NodeId> Dcdn::descendants(const std::set<NodeId>& of) const {
  return closure(of, children);
}

Dcdn build_dcdn(const LiftedModel& model, const ProblemInstance& problem,
                std::size_t horizon) {
  if (horizon == 0) throw Error("causal network horizon must be at least 1");
  Dcdn net;
  net.horizon = horizon;
  Grounding grounding = ground_model(model, problem.objects);
  net.atoms = std::move(grounding.atoms);
  for (const auto& action : grounding.actions) {
    net.operators.push_back(ground_operator(model, action));
  }
  net.static_predicates = static_predicates(model);

  const std::size_t n_atoms = net.atoms.size();
  const std::size_t n_actions = net.operators.size();
  for (std::size_t t = 0; t <= horizon; ++t) {
    for (std::size_t i = 0; i < n_atoms; ++i) {
      const bool exogenous = net.static_predicates.contains(net.atoms[i].predicate);
      net.nodes.push_back({NodeKind::kState, i, t, exogenous,
                           to_string(net.atoms[i]) + "@" + std::to_string(t)});
    }
    if (t == horizon) break;
    for (std::size_t a = 0; a < n_actions; ++a) {
      net.nodes.push_back({NodeKind::kDecision, a, t, false,
                           "dec:" + to_string(net.operators[a].action) + "@" +
                               std::to_string(t)});
    }
    for (std::size_t a = 0; a < n_actions; ++a) {
      net.nodes.push_back({NodeKind::kExecutable, a, t, false,
                           "X:" + to_string(net.operators[a].action) + "@" +
                               std::to_string(t)});
    }
  }
  for (NodeId id = 0; id < net.nodes.size(); ++id) {
    net.by_name_.emplace(net.nodes[id].name, id);
  }

  std::set<std::pair<NodeId, NodeId>> edges;
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      const GroundOperator& op = net.operators[a];
      const NodeId x = net.executable_node(a, t);
      edges.emplace(net.decision_node(a, t), x);
      for (const auto* list : {&op.pre_pos, &op.pre_neg}) {
        for (const auto& atom : *list) edges.emplace(net.state_node(*net.atom_index(atom), t), x);
      }
      for (const auto* list : {&op.add, &op.del}) {
        for (const auto& atom : *list) {
          edges.emplace(x, net.state_node(*net.atom_index(atom), t + 1));
        }
      }
      if (t > 0) {
        for (std::size_t b = 0; b < n_actions; ++b) {
          edges.emplace(net.executable_node(b, t - 1), net.decision_node(a, t));
        }
      }
    }
    for (std::size_t i = 0; i < n_atoms; ++i) {
      if (!net.nodes[net.state_node(i, t)].exogenous) {
        edges.emplace(net.state_node(i, t), net.state_node(i, t + 1));
      }
    }
  }
  net.edges.assign(edges.begin(), edges.end());
  net.parents.resize(net.nodes.size());
  net.children.resize(net.nodes.size());
  for (const auto& [from, to] : net.edges) {
    net.parents[to].push_back(from);
    net.children[from].push_back(to);
  }
  return net;
}

CausalSetting make_setting(std::shared_ptr<const Dcdn> network, State context,
                           Plan decisions) {
  for (const auto& atom : context.atoms()) {
    if (!network->atom_index(atom)) {
      throw Error("context atom " + to_string(atom) + " is not in the network");
    }
  }
  if (decisions.size() > network->horizon) {
    throw Error("plan of length " + std::to_string(decisions.size()) +
                " exceeds the network horizon " + std::to_string(network->horizon));
  }
  for (const auto& action : decisions) {
    if (!network->action_index(action)) {
      throw Error("decision " + to_string(action) + " is not in the network");
    }
  }
  return {std::move(network), std::move(context), std::move(decisions), {}};
}

CausalSetting intervene(const CausalSetting& setting,
                        const std::map<NodeId, bool>& assignments) {
  CausalSetting out = setting;
  for (const auto& [node, value] : assignments) {
    if (node >= setting.network->nodes.size()) throw Error("node id out of range");
    const Node& n = setting.network->nodes[node];
    if (n.exogenous) throw Error("cannot intervene on exogenous variable " + n.name);
    out.fixed[node] = value;
  }
  return out;
}

CausalSetting intervene(const CausalSetting& setting, const InterventionSpec& spec) {
  std::map<NodeId, bool> assignments;
  for (const auto& [name, value] : spec.assignments) {
    const NodeId id = setting.network->node(name);
    const Node& n = setting.network->nodes[id];
    if (spec.kind == InterventionKind::kDecision && n.kind != NodeKind::kDecision) {
      throw Error("decision intervention on non-decision variable " + name);
    }
    if (spec.kind == InterventionKind::kState &&
        (n.kind != NodeKind::kState || n.time != 0)) {
      throw Error("state intervention must target a state variable at t=0, got " + name);
    }
    assignments[id] = value;
  }
  return intervene(setting, assignments);
}

namespace {

// Evaluates the setting, or reports why it violates the one-action-per-step
// invariant through `violation`.
Valuation evaluate_or_report(const CausalSetting& setting, std::string& violation) {
  const Dcdn& net = *setting.network;
  Valuation values(net.nodes.size(), false);
  const std::size_t n_actions = net.operators.size();
  std::vector<std::optional<std::size_t>> planned(net.horizon);
  for (std::size_t t = 0; t < setting.decisions.size(); ++t) {
    planned[t] = net.action_index(setting.decisions[t]);
  }
  auto count_true = [&](std::size_t t, NodeId (Dcdn::*id)(std::size_t, std::size_t) const) {
    std::size_t count = 0;
    for (std::size_t a = 0; a < n_actions; ++a) count += values[(net.*id)(a, t)];
    return count;
  };

  for (NodeId id = 0; id < net.nodes.size(); ++id) {
    const Node& n = net.nodes[id];
    if (auto it = setting.fixed.find(id); it != setting.fixed.end()) {
      values[id] = it->second;
    } else if (n.kind == NodeKind::kState) {
      if (n.time == 0 || n.exogenous) {
        values[id] = setting.context.contains(net.atoms[n.index]);
      } else {
        bool value = values[net.state_node(n.index, n.time - 1)];
        for (NodeId parent : net.parents[id]) {
          const Node& p = net.nodes[parent];
          if (p.kind != NodeKind::kExecutable || !values[parent]) continue;
          const GroundOperator& op = net.operators[p.index];
          if (contains(op.add, net.atoms[n.index])) {
            value = true;
          } else if (contains(op.del, net.atoms[n.index])) {
            value = false;
          }
        }
        values[id] = value;
      }
    } else if (n.kind == NodeKind::kDecision) {
      bool enabled = n.time == 0;
      for (NodeId parent : net.parents[id]) enabled = enabled || values[parent];
      values[id] = enabled && planned[n.time] == n.index;
    } else {
      const GroundOperator& op = net.operators[n.index];
      bool applicable = values[net.decision_node(n.index, n.time)];
      for (const auto& atom : op.pre_pos) {
        applicable = applicable && values[net.state_node(*net.atom_index(atom), n.time)];
      }
      for (const auto& atom : op.pre_neg) {
        applicable = applicable && !values[net.state_node(*net.atom_index(atom), n.time)];
      }
      values[id] = applicable;
    }

    const bool layer_done = n.kind == NodeKind::kExecutable && n.index + 1 == n_actions;
    if (layer_done) {
      if (count_true(n.time, &Dcdn::decision_node) > 1) {
        violation = "more than one decision is true at step " + std::to_string(n.time);
        return values;
      }
      if (count_true(n.time, &Dcdn::executable_node) > 1) {
        violation = "more than one action executes at step " + std::to_string(n.time);
        return values;
      }
    }
  }
  return values;
}

}  // namespace

Valuation evaluate(const CausalSetting& setting) {
  std::string violation;
  Valuation values = evaluate_or_report(setting, violation);
  if (!violation.empty()) throw Error(violation);
  return values;
}

State layer_state(const Dcdn& network, const Valuation& values, std::size_t t) {
  State state;
  for (std::size_t i = 0; i < network.atoms.size(); ++i) {
    if (values[network.state_node(i, t)]) state.insert(network.atoms[i]);
  }
  return state;
}

CausalFormula CausalFormula::event(NodeId node, bool value) {
  CausalFormula f;
  f.op_ = Op::kEvent;
  f.node_ = node;
  f.value_ = value;
  return f;
}

CausalFormula CausalFormula::negation(CausalFormula inner) {
  CausalFormula f;
  f.op_ = Op::kNot;
  f.parts_.push_back(std::move(inner));
  return f;
}

CausalFormula CausalFormula::conjunction(std::vector<CausalFormula> parts) {
  CausalFormula f;
  f.op_ = Op::kAnd;
  f.parts_ = std::move(parts);
  return f;
}

bool CausalFormula::holds(const Valuation& values) const {
  switch (op_) {
    case Op::kEvent:
      return values.at(node_) == value_;
    case Op::kNot:
      return !parts_.front().holds(values);
    case Op::kAnd:
      return std::all_of(parts_.begin(), parts_.end(),
                         [&](const CausalFormula& f) { return f.holds(values); });
  }
  return false;
}

std::set<NodeId> CausalFormula::variables() const {
  if (op_ == Op::kEvent) return {node_};
  std::set<NodeId> out;
  for (const auto& part : parts_) {
    auto vars = part.variables();
    out.insert(vars.begin(), vars.end());
  }
  return out;
}

std::string CausalFormula::describe(const Dcdn& network) const {
  switch (op_) {
    case Op::kEvent:
      return network.nodes.at(node_).name + "=" + (value_ ? "1" : "0");
    case Op::kNot:
      return "!(" + parts_.front().describe(network) + ")";
    case Op::kAnd: {
      std::string out;
      for (const auto& part : parts_) {
        out += (out.empty() ? "" : " & ") + part.describe(network);
      }
      return "(" + out + ")";
    }
  }
  return {};
}

std::string to_string(CauseStatus status) {
  switch (status) {
    case CauseStatus::kCause:
      return "cause";
    case CauseStatus::kNotCause:
      return "not-cause";
    case CauseStatus::kInconclusive:
      return "inconclusive";
  }
  return {};
}

namespace {

enum class Tri { kYes, kNo, kUnknown };

// AC2: some alternative x' and some set W of variables held at their actual
// values make phi false. Only variables on a path from X to phi can matter
// when held, so W ranges over that set.
Tri counterfactual_dependence(const CausalSetting& setting, const Valuation& actual,
                              const std::map<NodeId, bool>& candidate,
                              const CausalFormula& phi, std::size_t max_contingency,
                              std::optional<CauseWitness>& witness) {
  const Dcdn& net = *setting.network;
  std::set<NodeId> roots;
  for (const auto& entry : candidate) roots.insert(entry.first);
  const auto downstream = net.descendants(roots);
  const auto upstream = net.ancestors(phi.variables());
  std::vector<NodeId> relevant;
  for (NodeId n : downstream) {
    if (upstream.contains(n) && !roots.contains(n) && !net.nodes[n].exogenous &&
        !setting.fixed.contains(n)) {
      relevant.push_back(n);
    }
  }
  if (relevant.size() > max_contingency) return Tri::kUnknown;

  std::vector<NodeId> xs(roots.begin(), roots.end());
  for (std::uint64_t alt = 0; alt < (std::uint64_t{1} << xs.size()); ++alt) {
    std::map<NodeId, bool> alternative;
    bool differs = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const bool value = (alt >> i) & 1U;
      alternative[xs[i]] = value;
      differs = differs || value != candidate.at(xs[i]);
    }
    if (!differs) continue;
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << relevant.size()); ++w) {
      std::map<NodeId, bool> assignments = alternative;
      std::map<NodeId, bool> held;
      for (std::size_t i = 0; i < relevant.size(); ++i) {
        if ((w >> i) & 1U) held[relevant[i]] = actual[relevant[i]];
      }
      assignments.insert(held.begin(), held.end());
      std::string violation;
      const Valuation values = evaluate_or_report(intervene(setting, assignments), violation);
      if (violation.empty() && !phi.holds(values)) {
        witness = CauseWitness{alternative, held};
        return Tri::kYes;
      }
    }
  }
  return Tri::kNo;
}

}  // namespace

CauseVerdict is_actual_cause(const CausalSetting& setting,
                             const std::map<NodeId, bool>& candidate,
                             const CausalFormula& phi, std::size_t max_contingency) {
  const Dcdn& net = *setting.network;
  CauseVerdict verdict;
  if (candidate.empty()) throw Error("candidate cause must name at least one variable");
  for (NodeId n : phi.variables()) {
    if (n >= net.nodes.size()) throw Error("formula references an unknown node");
  }
  for (const auto& [node, value] : candidate) {
    if (node >= net.nodes.size()) throw Error("candidate references an unknown node");
    if (net.nodes[node].exogenous) {
      verdict.reason = net.nodes[node].name + " is exogenous";
      return verdict;
    }
  }

  const Valuation actual = evaluate(setting);
  verdict.ac1 = phi.holds(actual) &&
                std::all_of(candidate.begin(), candidate.end(),
                            [&](const auto& e) { return actual[e.first] == e.second; });
  if (!verdict.ac1) {
    verdict.reason = "AC1 fails: the candidate or the formula is false in the actual world";
    return verdict;
  }

  const Tri ac2 = counterfactual_dependence(setting, actual, candidate, phi,
                                            max_contingency, verdict.witness);
  if (ac2 == Tri::kUnknown) {
    verdict.status = CauseStatus::kInconclusive;
    verdict.reason = "contingency set exceeds " + std::to_string(max_contingency) +
                     " variables";
    return verdict;
  }
  verdict.ac2 = ac2 == Tri::kYes;
  if (!verdict.ac2) {
    verdict.reason = "AC2 fails: no contingency makes the formula false";
    return verdict;
  }

  std::vector<std::pair<NodeId, bool>> members(candidate.begin(), candidate.end());
  const std::uint64_t full = (std::uint64_t{1} << members.size()) - 1;
  for (std::uint64_t subset = 1; subset < full; ++subset) {
    std::map<NodeId, bool> smaller;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if ((subset >> i) & 1U) smaller.insert(members[i]);
    }
    std::optional<CauseWitness> unused;
    const Tri sub = counterfactual_dependence(setting, actual, smaller, phi,
                                              max_contingency, unused);
    if (sub == Tri::kUnknown) {
      verdict.status = CauseStatus::kInconclusive;
      verdict.reason = "contingency set of a subset exceeds the budget";
      return verdict;
    }
    if (sub == Tri::kYes) {
      verdict.reason = "AC3 fails: a strict subset is already a cause";
      return verdict;
    }
  }
  verdict.ac3 = true;
  verdict.status = CauseStatus::kCause;
  return verdict;
}

SoundnessReport compare_sound_complete(const LiftedModel& candidate,
                                       const LiftedModel& reference) {
  if (candidate.predicates != reference.predicates ||
      candidate.headers() != reference.headers()) {
    throw Error("vocabulary mismatch between candidate and reference models");
  }
  auto non_absent = [](const LiftedModel& model) {
    std::set<PalmTuple> out;
    for (const auto& tuple : palm_tuples_of(model)) {
      if (tuple.mode != Mode::kAbsent) out.insert(tuple);
    }
    return out;
  };
  const auto mine = non_absent(candidate);
  const auto theirs = non_absent(reference);
  SoundnessReport report;
  std::set_difference(mine.begin(), mine.end(), theirs.begin(), theirs.end(),
                      std::inserter(report.spurious, report.spurious.end()));
  std::set_difference(theirs.begin(), theirs.end(), mine.begin(), mine.end(),
                      std::inserter(report.missing, report.missing.end()));
  return report;
}

std::string export_dot(const Dcdn& network) {
  std::ostringstream out;
  out << "digraph dcdn {\n";
  out << "  rankdir=LR;\n";
  out << "  node [fontname=\"Helvetica\"];\n";
  for (const Node& n : network.nodes) {
    out << "  \"" << n.name << "\" [";
    switch (n.kind) {
      case NodeKind::kState:
        out << "shape=ellipse";
        break;
      case NodeKind::kDecision:
        out << "shape=box";
        break;
      case NodeKind::kExecutable:
        out << "shape=diamond";
        break;
    }
    if (n.exogenous) out << ", style=dashed, color=gray40";
    out << "];\n";
  }
  for (const auto& [from, to] : network.edges) {
    out << "  \"" << network.nodes[from].name << "\" -> \"" << network.nodes[to].name
        << "\";\n";
  }
  out << "}\n";
  return out.str();
}

bool CauseCheck::passed() const {
  if (verdict.status == CauseStatus::kInconclusive) return false;
  return (verdict.status == CauseStatus::kCause) == expected_cause;
}

std::vector<CauseCheck> standard_cause_checks(const CausalSetting& setting) {
  const Dcdn& net = *setting.network;
  const Valuation actual = evaluate(setting);
  std::vector<CauseCheck> checks;
  auto check = [&](std::string family, NodeId cause, NodeId effect, bool expected) {
    const auto phi = CausalFormula::event(effect, actual[effect]);
    checks.push_back({std::move(family), net.nodes[cause].name, phi.describe(net),
                      expected,
                      is_actual_cause(setting, {{cause, actual[cause]}}, phi)});
  };

  for (std::size_t t = 0; t < setting.decisions.size(); ++t) {
    const std::size_t a = *net.action_index(setting.decisions[t]);
    const NodeId x = net.executable_node(a, t);
    for (std::size_t i = 0; i < net.atoms.size(); ++i) {
      if (net.static_predicates.contains(net.atoms[i].predicate)) {
        check("static", net.state_node(i, t), x, false);
      }
    }
    if (!actual[x]) continue;
    const GroundOperator& op = net.operators[a];
    for (const auto* list : {&op.pre_pos, &op.pre_neg}) {
      for (const auto& atom : *list) {
        const NodeId q = net.state_node(*net.atom_index(atom), t);
        if (!net.nodes[q].exogenous) check("precondition", q, x, true);
      }
    }
    for (const auto* list : {&op.add, &op.del}) {
      for (const auto& atom : *list) {
        const std::size_t i = *net.atom_index(atom);
        const NodeId q = net.state_node(i, t + 1);
        // An effect that restates the current value is not caused by the step.
        const bool changed = actual[q] != actual[net.state_node(i, t)];
        check("executability", x, q, changed);
        check("decision", net.decision_node(a, t), q, changed);
      }
    }
  }
  return checks;
}

}  // namespace agentprobe
