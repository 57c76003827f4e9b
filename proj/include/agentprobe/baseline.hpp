// Learning from passively observed traces of successful actions: the
// intersection-of-pre-states learner used as a point of comparison.
#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agentprobe/strips.hpp"

namespace agentprobe {

struct TraceStep {
  GroundAction action;
  State after;

  bool operator==(const TraceStep&) const = default;
};

/// s0, a1, s1, ..., ak, sk. Every step is a successful transition.
struct Trace {
  State initial;
  std::vector<TraceStep> steps;

  const State& before(std::size_t step) const {
    return step == 0 ? initial : steps[step - 1].after;
  }
  bool operator==(const Trace&) const = default;
};

/// Throws ModelError if some step is not a successful transition of `model`.
void validate_trace(const LiftedModel& model, const Trace& trace);

/// Restricts which transitions a corpus generator may take: when `action`
/// matches (or is "*"), every literal must hold in the pre-state under the
/// action's binding. Text form: `action:lit,lit,...`, e.g. `drive:src_blue(?s)`.
struct TransitionFilter {
  std::string action;
  std::vector<Literal> required;

  bool admits(const LiftedModel& model, const State& before,
              const GroundAction& action) const;
};

TransitionFilter parse_transition_filter(std::string_view text);

struct Corpus {
  std::vector<Trace> traces;
  std::vector<std::string> warnings;

  std::size_t transitions() const;
};

/// `count` random walks of up to `length` admitted, successful actions from
/// the problem's initial state. Walks that cannot move are dropped; a corpus
/// with no transitions carries a warning.
Corpus generate_traces(const LiftedModel& model, const ProblemInstance& problem,
                       std::size_t count, std::size_t length, std::uint64_t seed,
                       const std::vector<TransitionFilter>& filters = {});

/// One single-step trace per executing assignment of P*(a) under the
/// canonical grounding of every action: each atom is seen flipped both ways.
Corpus exhaustive_corpus(const LiftedModel& model, const ProblemInstance& problem,
                         std::size_t max_atoms_per_action = 16);

/// pre(a): literals over P*(a) holding in every pre-state of a's
/// occurrences; eff(a): the union of observed changes. Occurrences that
/// repeat an object are skipped. Throws Error when one action's changes
/// contradict each other.
LiftedModel learn_from_traces(const std::vector<Trace>& traces,
                              const Vocabulary& vocabulary,
                              const std::vector<ActionHeader>& headers);

/// Drops every precondition literal whose predicate no action of `learned`
/// changes.
LiftedModel strip_static(const LiftedModel& learned);

/// Line-delimited: `trace_id<TAB>before atoms<TAB>action<TAB>after atoms`.
void write_traces(std::ostream& out, const std::vector<Trace>& traces);
/// Throws Error on malformed lines or steps that do not chain.
std::vector<Trace> read_traces(std::istream& in);

}  // namespace agentprobe
