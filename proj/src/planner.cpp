#include "agentprobe/planner.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <utility>

namespace agentprobe {

bool SearchTask::satisfied(const State& state) const {
  return std::all_of(require_true.begin(), require_true.end(),
                     [&](const Atom& a) { return state.contains(a); }) &&
         std::none_of(require_false.begin(), require_false.end(),
                      [&](const Atom& a) { return state.contains(a); });
}

SearchTask make_search_task(const LiftedModel& model,
                            const ProblemInstance& problem, State initial,
                            std::set<Atom> require_true,
                            std::set<Atom> require_false) {
  SearchTask task;
  for (const auto& action : ground_model(model, problem.objects).actions) {
    task.operators.push_back(ground_operator(model, action));
  }
  task.initial = std::move(initial);
  task.require_true = std::move(require_true);
  task.require_false = std::move(require_false);
  return task;
}

SearchResult solve(const SearchTask& task, std::size_t max_expansions) {
  SearchResult result;
  if (task.satisfied(task.initial)) {
    result.status = SearchStatus::kFound;
    result.final_state = task.initial;
    return result;
  }
  struct Parent {
    const State* previous;
    std::size_t op;
  };
  std::map<State, Parent> visited;
  std::deque<const State*> frontier;
  frontier.push_back(&visited.emplace(task.initial, Parent{nullptr, 0}).first->first);

  while (!frontier.empty()) {
    if (result.expansions >= max_expansions) {
      result.status = SearchStatus::kInconclusive;
      return result;
    }
    const State* current = frontier.front();
    frontier.pop_front();
    ++result.expansions;
    for (std::size_t i = 0; i < task.operators.size(); ++i) {
      const GroundOperator& op = task.operators[i];
      if (!op.applicable(*current)) continue;
      State next = op.successor(*current);
      auto [it, inserted] = visited.emplace(std::move(next), Parent{current, i});
      if (!inserted) continue;
      if (task.satisfied(it->first)) {
        result.status = SearchStatus::kFound;
        result.final_state = it->first;
        for (const State* s = &it->first; visited.at(*s).previous != nullptr;
             s = visited.at(*s).previous) {
          result.plan.push_back(task.operators[visited.at(*s).op].action);
        }
        std::reverse(result.plan.begin(), result.plan.end());
        return result;
      }
      frontier.push_back(&it->first);
    }
  }
  result.status = SearchStatus::kNoPlan;
  return result;
}

std::vector<State> random_walk(const LiftedModel& model,
                               const ProblemInstance& problem,
                               std::size_t steps, std::uint64_t seed,
                               std::size_t cap) {
  std::vector<GroundOperator> operators;
  for (const auto& action : ground_model(model, problem.objects).actions) {
    operators.push_back(ground_operator(model, action));
  }
  std::mt19937_64 rng(seed);
  std::vector<State> visited{problem.init};
  std::set<State> seen{problem.init};
  State current = problem.init;
  for (std::size_t step = 0; step < steps && visited.size() < cap; ++step) {
    std::vector<const GroundOperator*> applicable;
    for (const auto& op : operators) {
      if (op.applicable(current)) applicable.push_back(&op);
    }
    if (applicable.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, applicable.size() - 1);
    current = applicable[pick(rng)]->successor(current);
    if (seen.insert(current).second) visited.push_back(current);
  }
  return visited;
}

SearchResult reach_constraint(const LiftedModel& model,
                              const ProblemInstance& problem, const State& from,
                              const std::set<Atom>& require_true,
                              const std::set<Atom>& require_false,
                              std::size_t max_expansions) {
  return solve(make_search_task(model, problem, from, require_true, require_false),
               max_expansions);
}

}  // namespace agentprobe
