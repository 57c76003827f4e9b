#include <gtest/gtest.h>

#include <sstream>

#include "agentprobe/agent.hpp"
#include "agentprobe/relational.hpp"
#include "fixtures.hpp"

namespace agentprobe {
namespace {

using testing::action;
using testing::atom;
using testing::plan;
using testing::state;

State with_statics(std::initializer_list<const char*> atoms) {
  State s = state(atoms);
  for (const char* blue : {"src_blue(l1)", "src_blue(l2)", "src_blue(l3)"}) s.insert(atom(blue));
  return s;
}

Query po(State s, Plan p) { return {QueryKind::kPlanOutcome, std::move(s), std::move(p)}; }
Query ap(State s, Plan p) { return {QueryKind::kActionPrecondition, std::move(s), std::move(p)}; }

// Every plan of length <= max_length over `actions`, shortest first.
std::vector<Plan> all_plans(const std::vector<GroundAction>& actions, std::size_t max_length) {
  std::vector<Plan> out{{}};
  std::vector<Plan> layer{{}};
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::vector<Plan> next;
    for (const auto& p : layer) {
      for (const auto& a : actions) {
        Plan q = p;
        q.push_back(a);
        next.push_back(std::move(q));
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

std::vector<State> all_states(const std::vector<Atom>& atoms) {
  std::vector<State> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << atoms.size()); ++mask) {
    State s;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (mask & (std::size_t{1} << i)) s.insert(atoms[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

TEST(AnswerPO, RunningExamplePlan) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  ResponsePO r = agent->answer_po(po(
      with_statics({"at(t1,l1)"}),
      plan({"drive(t1,l1,l2)", "drive(t1,l2,l3)", "drive(t1,l2,l1)"})));
  EXPECT_EQ(r.length, 2u);
  EXPECT_EQ(r.state, with_statics({"at(t1,l3)"}));
}

TEST(AnswerPO, EmptyPlanReturnsInitialState) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  ResponsePO r = agent->answer_po(po(f.problem.init, {}));
  EXPECT_EQ(r.length, 0u);
  EXPECT_EQ(r.state, f.problem.init);
}

TEST(AnswerPO, RepeatedQueryIsServedFromCache) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  Query q = po(f.problem.init, plan({"drive(t1,l1,l2)"}));
  Answer first = agent->ask(q);
  Answer second = agent->ask(q);
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(first.response, second.response);
  EXPECT_EQ(first.index, second.index);
  EXPECT_EQ(agent->log().count(QueryKind::kPlanOutcome), 1u);
  EXPECT_EQ(agent->log().size(), 1u);
  EXPECT_EQ(agent->log().cache_hits(), 1u);
}

TEST(AnswerAP, FailingFirstStepReportsLiftedPreconditions) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  ResponseAP r = agent->answer_ap(ap(with_statics({"at(t1,l1)"}), plan({"drive(t1,l2,l3)"})));
  EXPECT_EQ(r.length, 0u);
  EXPECT_EQ(r.failed_action, "drive");
  EXPECT_EQ(r.failed_preconditions, (std::set<Literal>{{atom("at(?t,?s)"), true}}));
  EXPECT_FALSE(r.final_state.has_value());
  EXPECT_FALSE(r.succeeded());
}

TEST(AnswerAP, SuccessEndsAtFailAction) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  ResponseAP r = agent->answer_ap(ap(with_statics({"at(t1,l1)"}), plan({"drive(t1,l1,l2)"})));
  EXPECT_EQ(r.length, 1u);
  EXPECT_TRUE(r.succeeded());
  EXPECT_EQ(r.failed_preconditions, std::set<Literal>{unsatisfiable_literal()});
  ASSERT_TRUE(r.final_state.has_value());
  EXPECT_EQ(*r.final_state, with_statics({"at(t1,l2)"}));
}

TEST(AnswerAP, EmptyPlan) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  ResponseAP r = agent->answer_ap(ap(f.problem.init, {}));
  EXPECT_EQ(r.length, 0u);
  EXPECT_EQ(r.failed_action, std::string(kFailAction));
  ASSERT_TRUE(r.final_state.has_value());
  EXPECT_EQ(*r.final_state, f.problem.init);
}

TEST(Protocol, OverlongPlanIsRejected) {
  auto f = testing::drive();
  HarnessConfig config;
  config.max_plan_length = 2;
  auto agent = make_simulated_agent(f.model, f.problem, config);
  Plan p = plan({"drive(t1,l1,l2)", "drive(t1,l2,l1)", "drive(t1,l1,l2)"});
  EXPECT_THROW(agent->ask(po(f.problem.init, p)), ProtocolError);
  EXPECT_THROW(agent->ask(ap(f.problem.init, p)), ProtocolError);
  EXPECT_EQ(agent->log().size(), 0u);
}

TEST(Protocol, UnknownObjectsAndKindMismatchAreRejected) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  EXPECT_THROW(agent->ask(po(state({"at(t1,l9)"}), {})), ProtocolError);
  EXPECT_THROW(agent->ask(po(f.problem.init, plan({"drive(t1,l1,l9)"}))), ProtocolError);
  EXPECT_THROW(agent->ask(po(f.problem.init, plan({"fly(t1,l1)"}))), ProtocolError);
  EXPECT_THROW(agent->answer_ap(po(f.problem.init, {})), ProtocolError);
  EXPECT_THROW(agent->answer_po(ap(f.problem.init, {})), ProtocolError);
}

TEST(Protocol, WalkAgentAcceptsOnlyCertifiedStates) {
  auto f = testing::drive();
  HarnessConfig config;
  config.capability = Capability::kWalk;
  auto agent = make_simulated_agent(f.model, f.problem, config);
  EXPECT_NO_THROW(agent->ask(po(f.problem.init, {})));
  const State elsewhere = with_statics({"at(t1,l3)"});
  EXPECT_THROW(agent->ask(po(elsewhere, {})), ProtocolError);
  ReachOutcome reached = agent->reach({atom("at(t1,l3)")}, {});
  ASSERT_EQ(reached.status, SearchStatus::kFound);
  EXPECT_EQ(*reached.state, elsewhere);
  EXPECT_TRUE(agent->certified(elsewhere));
  EXPECT_NO_THROW(agent->ask(po(elsewhere, {})));
  EXPECT_THROW(agent->ask(po(state({"at(t1,l1)"}), {})), ProtocolError);
  ReachOutcome impossible = agent->reach({}, {atom("src_blue(l2)")});
  EXPECT_EQ(impossible.status, SearchStatus::kNoPlan);
  EXPECT_FALSE(impossible.state.has_value());
}

TEST(Protocol, SampledStatesBecomeCertified) {
  auto f = testing::gripper();
  HarnessConfig config;
  config.capability = Capability::kWalk;
  auto agent = make_simulated_agent(f.model, f.problem, config);
  for (const auto& s : agent->sample_states(30, 5, kDefaultWalkCap)) {
    EXPECT_TRUE(agent->certified(s));
  }
}

TEST(QueryLog, CountersPartitionByKindAndTextFormIsStable) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  agent->ask(po(f.problem.init, plan({"drive(t1,l1,l2)"})));
  agent->ask(ap(f.problem.init, plan({"drive(t1,l2,l3)"})));
  agent->ask(ap(f.problem.init, plan({"drive(t1,l1,l3)"})));
  agent->ask(ap(f.problem.init, plan({"drive(t1,l1,l3)"})));
  const QueryLog& log = agent->log();
  EXPECT_EQ(log.count(QueryKind::kPlanOutcome), 1u);
  EXPECT_EQ(log.count(QueryKind::kActionPrecondition), 2u);
  EXPECT_EQ(log.size(), 3u);
  EXPECT_EQ(log.cache_hits(), 1u);
  std::ostringstream out;
  log.write(out);
  const std::string expected =
      "# agentprobe query log v1\n"
      "# index\tkind\tinit\tplan\tlength\tpayload\n"
      "0\tPO\t{at(t1,l1) src_blue(l1) src_blue(l2) src_blue(l3)}\t[drive(t1,l1,l2)]\t1\t"
      "state={at(t1,l2) src_blue(l1) src_blue(l2) src_blue(l3)}\n"
      "1\tAP\t{at(t1,l1) src_blue(l1) src_blue(l2) src_blue(l3)}\t[drive(t1,l2,l3)]\t0\t"
      "failed=drive\tpre={at(?t,?s)}\n"
      "2\tAP\t{at(t1,l1) src_blue(l1) src_blue(l2) src_blue(l3)}\t[drive(t1,l1,l3)]\t1\t"
      "failed=a_fail\tpre={never-satisfied}\t"
      "final={at(t1,l3) src_blue(l1) src_blue(l2) src_blue(l3)}\n";
  EXPECT_EQ(out.str(), expected);
}

TEST(Properties, MonotonePrefixAndApPoConsistency) {
  auto f = testing::drive();
  auto agent = make_simulated_agent(f.model, f.problem);
  const auto actions = ground_model(f.model, f.problem.objects).actions;
  const auto plans = all_plans(actions, 3);
  for (const State& s : {f.problem.init, with_statics({"at(t1,l2)"}), with_statics({})}) {
    for (const auto& p : plans) {
      ResponsePO r = agent->answer_po(po(s, p));
      ResponseAP a = agent->answer_ap(ap(s, p));
      EXPECT_EQ(a.length, r.length);
      EXPECT_EQ(a.succeeded(), r.length == p.size());
      if (r.length < p.size()) {
        EXPECT_EQ(a.failed_action, p[r.length].name);
        for (const auto& extra : actions) {
          Plan longer = p;
          longer.push_back(extra);
          ResponsePO e = agent->answer_po(po(s, longer));
          EXPECT_EQ(e.length, r.length);
          EXPECT_EQ(e.state, r.state);
        }
      }
    }
  }
}

TEST(Properties, CacheNeverChangesResponses) {
  auto f = testing::gripper();
  HarnessConfig off;
  off.cache = false;
  auto cached = make_simulated_agent(f.model, f.problem);
  auto uncached = make_simulated_agent(f.model, f.problem, off);
  const auto actions = ground_model(f.model, f.problem.objects).actions;
  for (int round = 0; round < 2; ++round) {
    for (const auto& p : all_plans(actions, 2)) {
      EXPECT_EQ(cached->ask(po(f.problem.init, p)).response,
                uncached->ask(po(f.problem.init, p)).response);
      EXPECT_EQ(cached->ask(ap(f.problem.init, p)).response,
                uncached->ask(ap(f.problem.init, p)).response);
    }
  }
  EXPECT_EQ(uncached->log().size(), 2 * cached->log().size());
  EXPECT_EQ(uncached->log().cache_hits(), 0u);
  EXPECT_EQ(cached->log().cache_hits(), cached->log().size());
}

TEST(TransitionTables, DriveTwoLocationsRows) {
  auto f = testing::drive_small();
  TransitionTables t = build_transition_tables(f.model, f.problem, 4);
  EXPECT_EQ(t.atoms.size(), 4u);
  EXPECT_EQ(t.r.size(), 2 * t.state_count() * t.actions.size());
  auto from = t.state_index(state({"at(t1,l1)"}));
  auto to = t.state_index(state({"at(t1,l2)"}));
  auto a = t.action_index(action("drive(t1,l1,l2)"));
  ASSERT_TRUE(from && to && a);
  const TransitionRow& row = t.r_row(true, *from, *a);
  EXPECT_TRUE(row.valid);
  EXPECT_EQ(row.s, *from);
  EXPECT_EQ(row.s_next, *to);
  EXPECT_TRUE(row.succ);
  for (const auto& r : t.r) {
    if (!r.valid || !r.succ) EXPECT_EQ(r.s, r.s_next);
  }
  for (StateId s = 0; s < t.state_count(); ++s) {
    for (ActionId i = 0; i < t.actions.size(); ++i) {
      EXPECT_EQ(t.r_row(false, s, i).s, s);
      EXPECT_EQ(t.r_row(true, s, i).a, i);
    }
  }
}

TEST(TransitionTables, CounterAndMembershipRelations) {
  auto f = testing::drive_small();
  TransitionTables t = build_transition_tables(f.model, f.problem, 4);
  EXPECT_EQ(t.n.size(), 2u * 5u);
  const CounterRow& frozen = t.n_row(false, 3);
  EXPECT_FALSE(frozen.valid);
  EXPECT_EQ(frozen.n, 3u);
  EXPECT_EQ(frozen.n_next, 3u);
  for (std::size_t n = 0; n <= 4; ++n) {
    EXPECT_EQ(t.n_row(true, n).n_next, n + 1);
    EXPECT_EQ(t.n_row(false, n).n_next, n);
  }
  std::set<std::pair<std::uint32_t, StateId>> members;
  for (const auto& m : t.s_rel) members.insert({m.p, m.s});
  for (StateId s = 0; s < t.state_count(); ++s) {
    State decoded = t.state_at(s);
    EXPECT_EQ(t.state_index(decoded), s);
    for (std::uint32_t p = 0; p < t.atoms.size(); ++p) {
      EXPECT_EQ(members.contains({p, s}), decoded.contains(t.atoms[p]));
    }
  }
}

TEST(TransitionTables, BudgetIsEnforced) {
  auto f = testing::blocksworld();
  EXPECT_THROW(build_transition_tables(f.model, f.problem, 3), BudgetExceeded);
  auto small = testing::drive_small();
  EXPECT_THROW(build_transition_tables(small.model, small.problem, 3, 3), BudgetExceeded);
}

TEST(RelationalPO, Examples) {
  auto f = testing::drive();
  TransitionTables t = build_transition_tables(f.model, f.problem, 3);
  ResponsePO empty = relational_answer_po(t, po(f.problem.init, {}));
  EXPECT_EQ(empty.length, 0u);
  EXPECT_EQ(empty.state, f.problem.init);
  ResponsePO running = relational_answer_po(
      t, po(with_statics({"at(t1,l1)"}),
            plan({"drive(t1,l1,l2)", "drive(t1,l2,l3)", "drive(t1,l2,l1)"})));
  EXPECT_EQ(running.length, 2u);
  EXPECT_EQ(running.state, with_statics({"at(t1,l3)"}));
  EXPECT_THROW(relational_answer_po(t, po(state({"at(t1,l9)"}), {})), ProtocolError);
}

TEST(RelationalPO, EquivalentToSimulatorOnDriveSweep) {
  auto f = testing::drive();
  TransitionTables t = build_transition_tables(f.model, f.problem, 3);
  const auto actions = ground_model(f.model, f.problem.objects).actions;
  const auto plans = all_plans(actions, 3);
  const SimulatorResponder sim(f.model);
  for (const auto& s : all_states(t.atoms)) {
    for (const auto& p : plans) {
      ASSERT_EQ(relational_answer_po(t, po(s, p)), sim.answer_po(s, p))
          << to_string(s) << " / " << to_string(p);
    }
  }
}

TEST(RelationalAP, RecoversHiddenPreconditionsOnSmallDomains) {
  for (const auto& [domain, problem] : testing::bundled_pairs()) {
    auto f = testing::load(domain, problem);
    if (ground_model(f.model, f.problem.objects).atoms.size() > kDefaultRelationalAtomBudget) {
      continue;
    }
    TransitionTables t = build_transition_tables(f.model, f.problem, 3);
    for (const auto& schema : f.model.actions) {
      EXPECT_EQ(relational_answer_ap(t, schema.name()), schema.pre)
          << problem << " " << schema.name();
    }
  }
}

TEST(RelationalAP, EmptyPreconditionAndNeverExecutableAction) {
  auto f = testing::load("drive-paint", "drive-paint");
  TransitionTables t = build_transition_tables(f.model, f.problem, 2);
  EXPECT_TRUE(relational_answer_ap(t, "paint").empty());

  // With a negative precondition on the destination, the self-loop grounding
  // needs at(t1,l1) both true and false.
  f.model.actions.front().pre.insert(Literal{atom("at(?t,?d)"), false});
  TransitionTables changed = build_transition_tables(f.model, f.problem, 2);
  auto loop = changed.action_index(action("drive(t1,l1,l1)"));
  auto move = changed.action_index(action("drive(t1,l1,l2)"));
  ASSERT_TRUE(loop && move);
  EXPECT_EQ(relational_ground_preconditions(changed, *loop),
            std::set<Literal>{unsatisfiable_literal()});
  EXPECT_EQ(relational_ground_preconditions(changed, *move),
            (std::set<Literal>{{atom("at(t1,l1)"), true}, {atom("at(t1,l2)"), false}}));
}

TEST(RelationalAgent, MatchesSimulatedAgentOnEveryQuery) {
  auto f = testing::drive();
  auto truth = make_simulated_agent(f.model, f.problem);
  auto relational = make_relational_agent(f.model, f.problem);
  const auto actions = ground_model(f.model, f.problem.objects).actions;
  for (const auto& s : {f.problem.init, with_statics({"at(t1,l2)"}), with_statics({})}) {
    for (const auto& p : all_plans(actions, 2)) {
      EXPECT_EQ(relational->ask(po(s, p)).response, truth->ask(po(s, p)).response);
      EXPECT_EQ(relational->ask(ap(s, p)).response, truth->ask(ap(s, p)).response);
    }
  }
}

}  // namespace
}  // namespace agentprobe
