#include <gtest/gtest.h>

#include <algorithm>

#include "agentprobe/dcdn.hpp"
#include "agentprobe/pddl.hpp"
#include "dot_checker.hpp"
#include "fixtures.hpp"

namespace agentprobe {
namespace {

using testing::atom;
using testing::plan;
using testing::state;

std::shared_ptr<const Dcdn> network_for(const testing::Fixture& f, std::size_t horizon) {
  return std::make_shared<const Dcdn>(build_dcdn(f.model, f.problem, horizon));
}

bool has_edge(const Dcdn& net, const std::string& from, const std::string& to) {
  return std::binary_search(net.edges.begin(), net.edges.end(),
                            std::make_pair(net.node(from), net.node(to)));
}

std::vector<std::string> parent_names(const Dcdn& net, const std::string& of) {
  std::vector<std::string> out;
  for (NodeId p : net.parents[net.node(of)]) out.push_back(net.nodes[p].name);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> child_names(const Dcdn& net, const std::string& of) {
  std::vector<std::string> out;
  for (NodeId c : net.children[net.node(of)]) out.push_back(net.nodes[c].name);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Plan> all_plans(const std::vector<GroundAction>& actions, std::size_t max_length) {
  std::vector<Plan> out{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_length; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& a : actions) {
        Plan p = out[i];
        p.push_back(a);
        out.push_back(std::move(p));
      }
    }
    begin = end;
  }
  return out;
}

TEST(BuildDcdn, ExecutabilityNodeWiring) {
  auto net = network_for(testing::drive(), 1);
  EXPECT_EQ(parent_names(*net, "X:drive(t1,l1,l2)@0"),
            (std::vector<std::string>{"at(t1,l1)@0", "dec:drive(t1,l1,l2)@0"}));
  EXPECT_EQ(child_names(*net, "X:drive(t1,l1,l2)@0"),
            (std::vector<std::string>{"at(t1,l1)@1", "at(t1,l2)@1"}));
  EXPECT_TRUE(has_edge(*net, "at(t1,l1)@0", "at(t1,l1)@1"));
}

TEST(BuildDcdn, StaticAtomsAreExogenousRoots) {
  auto net = network_for(testing::drive(), 2);
  std::size_t statics = 0;
  for (NodeId n = 0; n < net->nodes.size(); ++n) {
    const Node& node = net->nodes[n];
    if (node.kind == NodeKind::kState && net->atoms[node.index].predicate == "src_blue") {
      ++statics;
      EXPECT_TRUE(node.exogenous) << node.name;
      EXPECT_TRUE(net->parents[n].empty()) << node.name;
    }
    if (node.kind != NodeKind::kState) EXPECT_FALSE(node.exogenous) << node.name;
  }
  EXPECT_EQ(statics, 9u);
  EXPECT_EQ(net->static_predicates, std::set<std::string>{"src_blue"});
}

TEST(BuildDcdn, AcyclicAndLocalInTime) {
  auto net = network_for(testing::gripper(), 2);
  for (const auto& [from, to] : net->edges) {
    EXPECT_LT(from, to);  // nodes are stored in topological order
    const std::size_t tf = net->nodes[from].time;
    const std::size_t tt = net->nodes[to].time;
    EXPECT_TRUE(tt == tf || tt == tf + 1) << net->nodes[from].name << " -> " << net->nodes[to].name;
  }
  EXPECT_TRUE(std::is_sorted(net->edges.begin(), net->edges.end()));
}

TEST(BuildDcdn, ModelWithoutActionsHasOnlyPersistence) {
  auto f = testing::drive();
  f.model.actions.clear();
  auto net = network_for(f, 2);
  for (const auto& [from, to] : net->edges) {
    const Node& a = net->nodes[from];
    const Node& b = net->nodes[to];
    EXPECT_EQ(a.kind, NodeKind::kState);
    EXPECT_EQ(b.kind, NodeKind::kState);
    EXPECT_EQ(a.index, b.index);
    EXPECT_EQ(a.time + 1, b.time);
  }
  // Without actions every predicate is static, so nothing persists either.
  EXPECT_TRUE(net->edges.empty());
}

TEST(BuildDcdn, ZeroHorizonIsAnError) {
  auto f = testing::drive();
  EXPECT_THROW(build_dcdn(f.model, f.problem, 0), Error);
}

TEST(Intervene, ForcingADecisionDrivesTheTruck) {
  auto f = testing::drive();
  auto net = network_for(f, 1);
  CausalSetting idle = make_setting(net, f.problem.init, {});
  CausalSetting forced = intervene(
      idle, InterventionSpec{InterventionKind::kDecision, {{"dec:drive(t1,l1,l2)@0", true}}});
  Valuation v = evaluate(forced);
  EXPECT_TRUE(v[net->node("at(t1,l2)@1")]);
  EXPECT_FALSE(v[net->node("at(t1,l1)@1")]);
  EXPECT_TRUE(idle.fixed.empty());
  EXPECT_FALSE(evaluate(idle)[net->node("at(t1,l2)@1")]);
}

TEST(Intervene, SettingAVariableToItsValueChangesNothing) {
  auto f = testing::drive();
  auto net = network_for(f, 2);
  CausalSetting s = make_setting(net, f.problem.init, plan({"drive(t1,l1,l2)", "drive(t1,l2,l3)"}));
  Valuation actual = evaluate(s);
  for (NodeId n = 0; n < net->nodes.size(); ++n) {
    if (net->nodes[n].exogenous) continue;
    EXPECT_EQ(evaluate(intervene(s, {{n, actual[n]}})), actual) << net->nodes[n].name;
  }
}

TEST(Intervene, HardStateInterventionFreezesTheState) {
  auto f = testing::drive();
  auto net = network_for(f, 1);
  CausalSetting s = make_setting(net, f.problem.init, plan({"drive(t1,l1,l2)"}));
  CausalSetting moved = intervene(
      s, InterventionSpec{InterventionKind::kState, {{"at(t1,l1)@0", false}}});
  Valuation v = evaluate(moved);
  EXPECT_FALSE(v[net->node("X:drive(t1,l1,l2)@0")]);
  EXPECT_TRUE(v[net->node("dec:drive(t1,l1,l2)@0")]);
  EXPECT_EQ(layer_state(*net, v, 1), layer_state(*net, v, 0));
}

TEST(Intervene, KindAndExogeneityAreEnforced) {
  auto f = testing::drive();
  auto net = network_for(f, 2);
  CausalSetting s = make_setting(net, f.problem.init, {});
  EXPECT_THROW(intervene(s, InterventionSpec{InterventionKind::kDecision, {{"at(t1,l1)@0", true}}}),
               Error);
  EXPECT_THROW(intervene(s, InterventionSpec{InterventionKind::kState, {{"at(t1,l1)@1", true}}}),
               Error);
  EXPECT_THROW(
      intervene(s, InterventionSpec{InterventionKind::kState, {{"src_blue(l1)@0", false}}}),
      Error);
  EXPECT_THROW(intervene(s, {{net->node("src_blue(l1)@0"), false}}), Error);
  EXPECT_THROW(intervene(s, InterventionSpec{InterventionKind::kState, {{"nowhere@0", true}}}),
               Error);
}

TEST(Intervene, EffectsStayInsideTheDownstreamCone) {
  auto f = testing::drive();
  auto net = network_for(f, 2);
  CausalSetting s = make_setting(net, f.problem.init, plan({"drive(t1,l1,l2)", "drive(t1,l2,l3)"}));
  Valuation actual = evaluate(s);
  for (NodeId n = 0; n < net->nodes.size(); ++n) {
    if (net->nodes[n].exogenous) continue;
    Valuation changed;
    try {
      changed = evaluate(intervene(s, {{n, !actual[n]}}));
    } catch (const Error&) {
      continue;  // a second decision in the same step
    }
    const auto cone = net->descendants({n});
    for (NodeId m = 0; m < net->nodes.size(); ++m) {
      if (!cone.contains(m)) {
        EXPECT_EQ(changed[m], actual[m]) << "do(" << net->nodes[n].name << ") changed "
                                         << net->nodes[m].name;
      }
    }
  }
}

TEST(Evaluate, MatchesExecutePlanOnEveryShortDrivePlan) {
  auto f = testing::drive();
  auto net = network_for(f, 3);
  const auto actions = ground_model(f.model, f.problem.objects).actions;
  for (const State& context : {f.problem.init, state({"at(t1,l2)", "src_blue(l1)"}), State{}}) {
    for (const auto& p : all_plans(actions, 3)) {
      Valuation v = evaluate(make_setting(net, context, p));
      Execution run = execute_plan(f.model, context, p);
      State current = context;
      for (std::size_t t = 0; t <= 3; ++t) {
        if (t > 0 && t <= run.length) current = apply_action(f.model, current, p[t - 1]).state;
        ASSERT_EQ(layer_state(*net, v, t), current) << to_string(p) << " t=" << t;
      }
    }
  }
}

TEST(Evaluate, NoDecisionsMeansEveryLayerIsInitial) {
  auto f = testing::gripper();
  auto net = network_for(f, 2);
  Valuation v = evaluate(make_setting(net, f.problem.init, {}));
  for (std::size_t t = 0; t <= 2; ++t) EXPECT_EQ(layer_state(*net, v, t), f.problem.init);
}

TEST(Evaluate, FailedActionLeavesTheNextLayerUnchanged) {
  auto f = testing::drive();
  auto net = network_for(f, 2);
  Valuation v = evaluate(make_setting(net, f.problem.init, plan({"drive(t1,l2,l3)"})));
  EXPECT_FALSE(v[net->node("X:drive(t1,l2,l3)@0")]);
  EXPECT_EQ(layer_state(*net, v, 1), layer_state(*net, v, 0));
}

TEST(Evaluate, SimultaneousDecisionsAreAnError) {
  auto f = testing::drive();
  auto net = network_for(f, 1);
  CausalSetting s = make_setting(net, f.problem.init, plan({"drive(t1,l1,l2)"}));
  CausalSetting both = intervene(s, {{net->node("dec:drive(t1,l1,l3)@0"), true}});
  EXPECT_THROW(evaluate(both), Error);
}

TEST(MakeSetting, RejectsBadInputs) {
  auto f = testing::drive();
  auto net = network_for(f, 1);
  EXPECT_THROW(make_setting(net, f.problem.init, plan({"drive(t1,l1,l2)", "drive(t1,l2,l3)"})),
               Error);
  EXPECT_THROW(make_setting(net, state({"at(t1,l9)"}), {}), Error);
  EXPECT_THROW(make_setting(net, f.problem.init, plan({"drive(t1,l1,l9)"})), Error);
}

class DriveCauses : public ::testing::Test {
 protected:
  void SetUp() override {
    auto f = testing::drive();
    net = network_for(f, 2);
    setting = make_setting(net, f.problem.init, plan({"drive(t1,l1,l2)", "drive(t1,l2,l3)"}));
    actual = evaluate(setting);
    executes = CausalFormula::event(net->node("X:drive(t1,l1,l2)@0"), true);
  }
  std::shared_ptr<const Dcdn> net;
  CausalSetting setting;
  Valuation actual;
  CausalFormula executes = CausalFormula::event(0, true);
};

TEST_F(DriveCauses, SourceLocationCausesExecutability) {
  CauseVerdict v = is_actual_cause(setting, {{net->node("at(t1,l1)@0"), true}}, executes);
  EXPECT_EQ(v.status, CauseStatus::kCause);
  EXPECT_TRUE(v.ac1 && v.ac2 && v.ac3);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(v.witness->alternative.at(net->node("at(t1,l1)@0")), false);
}

TEST_F(DriveCauses, StaticColourIsNotACause) {
  CauseVerdict v = is_actual_cause(setting, {{net->node("src_blue(l1)@0"), true}}, executes);
  EXPECT_EQ(v.status, CauseStatus::kNotCause);
  EXPECT_FALSE(v.ac1);
  EXPECT_NE(v.reason.find("exogenous"), std::string::npos);
}

TEST_F(DriveCauses, SupersetFailsMinimality) {
  CauseVerdict v = is_actual_cause(
      setting, {{net->node("at(t1,l1)@0"), true}, {net->node("at(t1,l2)@0"), false}}, executes);
  EXPECT_EQ(v.status, CauseStatus::kNotCause);
  EXPECT_TRUE(v.ac1);
  EXPECT_TRUE(v.ac2);
  EXPECT_FALSE(v.ac3);

  CauseVerdict with_static = is_actual_cause(
      setting, {{net->node("at(t1,l1)@0"), true}, {net->node("src_blue(l1)@0"), true}}, executes);
  EXPECT_EQ(with_static.status, CauseStatus::kNotCause);
}

TEST_F(DriveCauses, IrrelevantAtomFailsCounterfactualDependence) {
  CauseVerdict v = is_actual_cause(setting, {{net->node("at(t1,l3)@0"), false}}, executes);
  EXPECT_EQ(v.status, CauseStatus::kNotCause);
  EXPECT_TRUE(v.ac1);
  EXPECT_FALSE(v.ac2);
}

TEST_F(DriveCauses, FalseCandidateFailsAC1) {
  CauseVerdict v = is_actual_cause(setting, {{net->node("at(t1,l1)@0"), false}}, executes);
  EXPECT_FALSE(v.ac1);
  EXPECT_EQ(v.status, CauseStatus::kNotCause);
}

TEST_F(DriveCauses, TinyBudgetIsInconclusive) {
  const auto phi = CausalFormula::event(net->node("at(t1,l3)@2"), true);
  CauseVerdict v = is_actual_cause(setting, {{net->node("at(t1,l1)@0"), true}}, phi, 0);
  EXPECT_EQ(v.status, CauseStatus::kInconclusive);
}

TEST_F(DriveCauses, CompoundFormulas) {
  const auto both = CausalFormula::conjunction(
      {executes, CausalFormula::negation(
                     CausalFormula::event(net->node("at(t1,l1)@1"), true))});
  EXPECT_TRUE(both.holds(actual));
  EXPECT_EQ(both.variables(),
            (std::set<NodeId>{net->node("X:drive(t1,l1,l2)@0"), net->node("at(t1,l1)@1")}));
  EXPECT_FALSE(both.describe(*net).empty());
  EXPECT_EQ(is_actual_cause(setting, {{net->node("at(t1,l1)@0"), true}}, both).status,
            CauseStatus::kCause);
}

TEST_F(DriveCauses, StandardFamilyAllPass) {
  auto checks = standard_cause_checks(setting);
  ASSERT_FALSE(checks.empty());
  std::set<std::string> families;
  for (const auto& c : checks) {
    families.insert(c.family);
    EXPECT_TRUE(c.passed()) << c.family << " " << c.cause << " -> " << c.effect << ": "
                            << c.verdict.reason;
  }
  EXPECT_EQ(families,
            (std::set<std::string>{"decision", "executability", "precondition", "static"}));
}

TEST_F(DriveCauses, ReturnedCausesAreMinimal) {
  std::vector<std::map<NodeId, bool>> candidates;
  std::vector<NodeId> endogenous;
  for (NodeId n = 0; n < net->nodes.size(); ++n) {
    if (!net->nodes[n].exogenous && net->nodes[n].time == 0) endogenous.push_back(n);
  }
  for (std::size_t i = 0; i < endogenous.size(); ++i) {
    candidates.push_back({{endogenous[i], actual[endogenous[i]]}});
    for (std::size_t j = i + 1; j < endogenous.size(); ++j) {
      candidates.push_back(
          {{endogenous[i], actual[endogenous[i]]}, {endogenous[j], actual[endogenous[j]]}});
    }
  }
  const auto phi = CausalFormula::event(net->node("at(t1,l2)@1"), true);
  std::set<std::map<NodeId, bool>> causes;
  for (const auto& c : candidates) {
    if (is_actual_cause(setting, c, phi).status == CauseStatus::kCause) causes.insert(c);
  }
  EXPECT_FALSE(causes.empty());
  for (const auto& c : causes) {
    if (c.size() < 2) continue;
    for (const auto& member : c) {
      EXPECT_FALSE(causes.contains({member})) << net->nodes[member.first].name;
    }
  }
}

// Verdicts over every single-variable candidate and single-atom formula.
std::vector<CauseStatus> verdict_table(const LiftedModel& model, const ProblemInstance& problem,
                                       const Plan& p) {
  auto net = std::make_shared<const Dcdn>(build_dcdn(model, problem, 2));
  CausalSetting s = make_setting(net, problem.init, p);
  Valuation actual = evaluate(s);
  std::vector<CauseStatus> out;
  for (NodeId x = 0; x < net->nodes.size(); ++x) {
    for (NodeId y = 0; y < net->nodes.size(); ++y) {
      if (net->nodes[y].kind != NodeKind::kState || net->nodes[y].time == 0) continue;
      out.push_back(
          is_actual_cause(s, {{x, actual[x]}}, CausalFormula::event(y, actual[y])).status);
    }
  }
  return out;
}

TEST(CauseSets, EqualPalmTuplesGiveEqualVerdicts) {
  auto f = testing::drive_small();
  const Plan p = plan({"drive(t1,l1,l2)", "drive(t1,l2,l1)"});
  LiftedModel rebuilt = model_from_palm_tuples(skeleton_of(f.model), palm_tuples_of(f.model));
  LiftedModel reparsed = pddl::parse_domain({pddl::serialize_domain(f.model)});
  const auto reference = verdict_table(f.model, f.problem, p);
  EXPECT_EQ(verdict_table(rebuilt, f.problem, p), reference);
  EXPECT_EQ(verdict_table(reparsed, f.problem, p), reference);
  EXPECT_EQ(std::count(reference.begin(), reference.end(), CauseStatus::kInconclusive), 0);

  // Dropping the delete effect changes which atoms are causes.
  LiftedModel no_delete = f.model;
  no_delete.actions.front().eff.erase({atom("at(?t,?s)"), false});
  EXPECT_NE(verdict_table(no_delete, f.problem, p), reference);
}

TEST(CompareSoundComplete, Examples) {
  auto truth = testing::load_domain("drive");
  SoundnessReport same = compare_sound_complete(truth, truth);
  EXPECT_TRUE(same.sound());
  EXPECT_TRUE(same.complete());

  LiftedModel extra = truth;
  extra.actions.front().pre.insert({atom("src_blue(?s)"), true});
  SoundnessReport r = compare_sound_complete(extra, truth);
  EXPECT_EQ(r.spurious, (std::set<PalmTuple>{{atom("src_blue(?s)"), "drive", Location::kPre,
                                               Mode::kPositive}}));
  EXPECT_TRUE(r.complete());

  SoundnessReport flipped = compare_sound_complete(truth, extra);
  EXPECT_TRUE(flipped.sound());
  EXPECT_EQ(flipped.missing.size(), 1u);

  EXPECT_THROW(compare_sound_complete(truth, testing::load_domain("gripper")), Error);
}

TEST(ExportDot, WellFormedAndCountsMatch) {
  auto net = network_for(testing::drive(), 1);
  const std::string dot = export_dot(*net);
  testing::DotChecker checker(dot);
  EXPECT_EQ(checker.check(), "");
  EXPECT_EQ(checker.edges(), net->edges.size());
  EXPECT_EQ(checker.nodes().size(), net->nodes.size());
  EXPECT_NE(dot.find("shape=ellipse"), std::string::npos);
  EXPECT_NE(dot.find("shape=box"), std::string::npos);
  EXPECT_NE(dot.find("shape=diamond"), std::string::npos);
  EXPECT_NE(dot.find("\"src_blue(l1)@0\" [shape=ellipse, style=dashed"), std::string::npos);
  EXPECT_EQ(export_dot(*network_for(testing::drive(), 1)), dot);
}

TEST(ExportDot, EmptyActionModelIsStateNodesOnly) {
  auto f = testing::drive();
  f.model.actions.clear();
  const std::string dot = export_dot(build_dcdn(f.model, f.problem, 2));
  EXPECT_EQ(testing::check_dot(dot), "");
  EXPECT_EQ(dot.find("shape=box"), std::string::npos);
  EXPECT_EQ(dot.find("->"), std::string::npos);
}

TEST(ExportDot, CheckerRejectsMalformedText) {
  EXPECT_NE(testing::check_dot("digraph { \"a\" -> }"), "");
  EXPECT_NE(testing::check_dot("digraph g { a [shape] }"), "");
  EXPECT_NE(testing::check_dot("digraph g { a -> b"), "");
  EXPECT_EQ(testing::check_dot("digraph g { a -> b -> c [color=red]; }"), "");
}

}  // namespace
}  // namespace agentprobe
