#include "agentprobe/lifting.hpp"

#include <algorithm>
#include <map>

namespace agentprobe {

State CanonicalGrounding::ground(const std::vector<Atom>& lifted_true) const {
  State s;
  for (const auto& atom : lifted_true) s.insert(ground(atom));
  return s;
}

std::optional<CanonicalGrounding> canonical_grounding(const ActionHeader& header,
                                                      const ObjectSet& objects) {
  CanonicalGrounding g{header, {}, {header.name, {}}};
  std::set<std::string> used;
  for (const auto& param : header.params) {
    auto it = std::find_if(objects.begin(), objects.end(), [&](const TypedName& o) {
      return !used.contains(o.name) && type_compatible(o.type, param.type);
    });
    if (it == objects.end()) return std::nullopt;
    used.insert(it->name);
    g.binding[param.name] = it->name;
    g.action.args.push_back(it->name);
  }
  return g;
}

std::optional<CanonicalGrounding> grounding_of(const ActionHeader& header,
                                               const GroundAction& action) {
  if (action.name != header.name || action.args.size() != header.params.size()) {
    return std::nullopt;
  }
  std::set<std::string> distinct(action.args.begin(), action.args.end());
  if (distinct.size() != action.args.size()) return std::nullopt;
  return CanonicalGrounding{header, bind(header, action), action};
}

std::vector<CanonicalGrounding> injective_groundings(const ActionHeader& header,
                                                     const ObjectSet& objects) {
  std::vector<CanonicalGrounding> out;
  for (const auto& action : ground_actions(header, objects)) {
    if (auto g = grounding_of(header, action)) out.push_back(std::move(*g));
  }
  return out;
}

Atom lift_to_schema(const Atom& ground, const CanonicalGrounding& grounding) {
  std::map<std::string, std::string> inverse;
  for (const auto& [param, object] : grounding.binding) inverse[object] = param;
  Atom lifted{ground.predicate, {}};
  for (const auto& arg : ground.args) {
    auto it = inverse.find(arg);
    if (it == inverse.end()) {
      throw Error("cannot lift " + to_string(ground) + ": object '" + arg +
                  "' is not bound by " + to_string(grounding.action));
    }
    lifted.args.push_back(it->second);
  }
  return lifted;
}

Literal lift_to_schema(const Literal& ground, const CanonicalGrounding& grounding) {
  return {lift_to_schema(ground.atom, grounding), ground.positive};
}

std::set<Literal> lift_to_schema(const std::set<Literal>& ground,
                                 const CanonicalGrounding& grounding) {
  std::set<Literal> out;
  for (const auto& lit : ground) out.insert(lift_to_schema(lit, grounding));
  return out;
}

}  // namespace agentprobe
