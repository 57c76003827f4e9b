// Canonical injective groundings of action schemas and the inverse
// substitution that lifts ground observations back to schema parameters.
#pragma once

#include <optional>
#include <set>
#include <vector>

#include "agentprobe/strips.hpp"

namespace agentprobe {

/// An injective, type-respecting substitution of objects for the parameters
/// of one action schema.
struct CanonicalGrounding {
  ActionHeader header;
  Binding binding;  // parameter -> object
  GroundAction action;

  Atom ground(const Atom& lifted) const { return substitute(lifted, binding); }
  State ground(const std::vector<Atom>& lifted_true) const;

  bool operator==(const CanonicalGrounding&) const = default;
};

/// Assigns each parameter the first unused object of a compatible type, in the
/// order objects are declared. Empty when there are too few objects.
std::optional<CanonicalGrounding> canonical_grounding(const ActionHeader& header,
                                                      const ObjectSet& objects);

/// Every injective grounding of `header`, in lexicographic action order.
std::vector<CanonicalGrounding> injective_groundings(const ActionHeader& header,
                                                     const ObjectSet& objects);

/// Grounding for an arbitrary ground action; empty if it repeats an object.
std::optional<CanonicalGrounding> grounding_of(const ActionHeader& header,
                                               const GroundAction& action);

/// Inverts the substitution. Throws Error if the atom mentions an object that
/// the grounding does not bind.
Atom lift_to_schema(const Atom& ground, const CanonicalGrounding& grounding);
Literal lift_to_schema(const Literal& ground, const CanonicalGrounding& grounding);
std::set<Literal> lift_to_schema(const std::set<Literal>& ground,
                                 const CanonicalGrounding& grounding);

}  // namespace agentprobe
