// Shared helpers for loading the bundled domains in tests.
#pragma once

#include <algorithm>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "agentprobe/pddl.hpp"
#include "agentprobe/strips.hpp"

namespace agentprobe::testing {

inline std::filesystem::path data_dir() { return AGENTPROBE_DATA_DIR; }
inline std::filesystem::path golden_dir() { return AGENTPROBE_GOLDEN_DIR; }

inline LiftedModel load_domain(const std::string& name) {
  return pddl::parse_domain(pddl::read_source(data_dir() / "domains" / (name + ".pddl")));
}

inline ProblemInstance load_problem(const std::string& name, const LiftedModel& model) {
  return pddl::parse_problem(
      pddl::read_source(data_dir() / "problems" / (name + ".pddl")), model);
}

struct Fixture {
  LiftedModel model;
  ProblemInstance problem;
};

inline Fixture load(const std::string& domain, const std::string& problem) {
  LiftedModel model = load_domain(domain);
  ProblemInstance instance = load_problem(problem, model);
  return {std::move(model), std::move(instance)};
}

inline Fixture drive() { return load("drive", "drive-3loc"); }
inline Fixture drive_small() { return load("drive", "drive-2loc"); }
inline Fixture gripper() { return load("gripper", "gripper-2"); }
inline Fixture blocksworld() { return load("blocksworld", "blocksworld-3"); }

/// The (domain, problem) pairs every exact-recovery property is checked on.
inline std::vector<std::pair<std::string, std::string>> bundled_pairs() {
  return {{"drive", "drive-3loc"},         {"drive", "drive-2loc"},
          {"gripper", "gripper-2"},        {"blocksworld", "blocksworld-2"},
          {"blocksworld", "blocksworld-3"}, {"switches", "switches-2"},
          {"citydrive", "citydrive"},      {"drive-paint", "drive-paint"}};
}

inline std::vector<std::string> bundled_domains() {
  return {"blocksworld", "citydrive", "drive", "drive-paint", "gripper", "switches"};
}

/// The drive domain with `extra` additional unary location predicates
/// (marks), giving |P*| = 4 + 2 * extra.
inline Fixture drive_with_marks(std::size_t extra) {
  Fixture f = drive();
  for (std::size_t i = 0; i < extra; ++i) {
    f.model.predicates.push_back({"mark" + std::to_string(i), {"loc"}});
    f.problem.init.insert({"mark" + std::to_string(i), {"l" + std::to_string(1 + i % 3)}});
  }
  std::sort(f.model.predicates.begin(), f.model.predicates.end(),
            [](const PredicateDecl& a, const PredicateDecl& b) { return a.name < b.name; });
  validate(f.model, f.problem);
  return f;
}

inline Atom atom(const std::string& text) { return pddl::parse_atom_text(text); }
inline GroundAction action(const std::string& text) { return pddl::parse_action_text(text); }

inline State state(std::initializer_list<const char*> atoms) {
  State s;
  for (const char* a : atoms) s.insert(atom(a));
  return s;
}

inline Plan plan(std::initializer_list<const char*> actions) {
  Plan p;
  for (const char* a : actions) p.push_back(action(a));
  return p;
}

}  // namespace agentprobe::testing
