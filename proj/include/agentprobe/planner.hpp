// Breadth-first forward search, random walks and constraint reachability over
// a grounded STRIPS task.
#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include "agentprobe/strips.hpp"

namespace agentprobe {

struct SearchTask {
  std::vector<GroundOperator> operators;  // sorted by ground action
  State initial;
  std::set<Atom> require_true;
  std::set<Atom> require_false;

  bool satisfied(const State& state) const;
};

/// Grounds `model` over the problem's objects; the goal test comes from
/// `require_true`/`require_false`.
SearchTask make_search_task(const LiftedModel& model,
                            const ProblemInstance& problem, State initial,
                            std::set<Atom> require_true,
                            std::set<Atom> require_false);

enum class SearchStatus {
  kFound,
  kNoPlan,        // the whole reachable space was explored
  kInconclusive,  // the expansion bound ran out first
};

struct SearchResult {
  SearchStatus status = SearchStatus::kNoPlan;
  Plan plan;
  State final_state;
  std::size_t expansions = 0;
};

inline constexpr std::size_t kDefaultExpansionBound = 100000;
inline constexpr std::size_t kDefaultWalkCap = 60;

/// Shortest plan by breadth-first layering; successors are generated in
/// lexicographic ground-action order.
SearchResult solve(const SearchTask& task,
                   std::size_t max_expansions = kDefaultExpansionBound);

/// Distinct states visited by a seeded random walk of applicable actions,
/// starting with the initial state and capped at `cap` states.
std::vector<State> random_walk(const LiftedModel& model,
                               const ProblemInstance& problem,
                               std::size_t steps, std::uint64_t seed,
                               std::size_t cap = kDefaultWalkCap);

SearchResult reach_constraint(const LiftedModel& model,
                              const ProblemInstance& problem, const State& from,
                              const std::set<Atom>& require_true,
                              const std::set<Atom>& require_false,
                              std::size_t max_expansions = kDefaultExpansionBound);

}  // namespace agentprobe
