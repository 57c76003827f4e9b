#include "agentprobe/agent.hpp"

#include <chrono>
#include <sstream>
#include <utility>

namespace agentprobe {

std::string to_string(QueryKind kind) {
  return kind == QueryKind::kPlanOutcome ? "PO" : "AP";
}

std::string to_string(Capability capability) {
  return capability == Capability::kTeleport ? "teleport" : "walk";
}

Literal unsatisfiable_literal() {
  return Literal{Atom{"never-satisfied", {}}, true};
}

ResponsePO SimulatorResponder::answer_po(const State& initial,
                                         const Plan& plan) const {
  Execution run = execute_plan(model_, initial, plan);
  return {run.length, std::move(run.state)};
}

ResponseAP SimulatorResponder::answer_ap(const State& initial,
                                         const Plan& plan) const {
  Execution run = execute_plan(model_, initial, plan);
  ResponseAP response;
  response.length = run.length;
  if (run.length < plan.size()) {
    const ActionSchema* failed = model_.find_action(plan[run.length].name);
    response.failed_action = failed->name();
    response.failed_preconditions = failed->pre;
  } else {
    response.failed_action = std::string(kFailAction);
    response.failed_preconditions = {unsatisfiable_literal()};
    response.final_state = std::move(run.state);
  }
  return response;
}

std::size_t QueryLog::append(LogEntry entry) {
  if (entry.query.kind == QueryKind::kPlanOutcome) {
    ++po_count_;
  } else {
    ++ap_count_;
  }
  entries_.push_back(std::move(entry));
  return entries_.size() - 1;
}

std::string format_log_line(std::size_t index, const LogEntry& entry) {
  std::ostringstream out;
  out << index << '\t' << to_string(entry.query.kind) << "\t{"
      << to_string(entry.query.initial) << "}\t[" << to_string(entry.query.plan)
      << "]\t";
  if (const auto* po = std::get_if<ResponsePO>(&entry.response)) {
    out << po->length << "\tstate={" << to_string(po->state) << "}";
  } else {
    const auto& ap = std::get<ResponseAP>(entry.response);
    out << ap.length << "\tfailed=" << ap.failed_action << "\tpre={";
    bool first = true;
    for (const auto& lit : ap.failed_preconditions) {
      out << (first ? "" : " ") << to_string(lit);
      first = false;
    }
    out << "}";
    if (ap.final_state) out << "\tfinal={" << to_string(*ap.final_state) << "}";
  }
  return out.str();
}

void QueryLog::write(std::ostream& out) const {
  out << "# agentprobe query log v1\n";
  out << "# index\tkind\tinit\tplan\tlength\tpayload\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out << format_log_line(i, entries_[i]) << '\n';
  }
}

AgentHarness::AgentHarness(LiftedModel hidden, ProblemInstance problem,
                           std::unique_ptr<Responder> backend,
                           HarnessConfig config)
    : hidden_(std::move(hidden)),
      problem_(std::move(problem)),
      backend_(std::move(backend)),
      config_(config) {
  certified_.insert(problem_.init);
}

std::vector<ActionHeader> AgentHarness::headers() const {
  return hidden_.headers();
}

bool AgentHarness::certified(const State& state) const {
  std::lock_guard lock(mutex_);
  return certified_.contains(state);
}

void AgentHarness::validate(const Query& query) const {
  if (query.plan.size() > config_.max_plan_length) {
    throw ProtocolError("plan of length " + std::to_string(query.plan.size()) +
                        " exceeds the maximum of " +
                        std::to_string(config_.max_plan_length));
  }
  try {
    for (const auto& atom : query.initial.atoms()) {
      validate_ground_atom(hidden_, problem_.objects, atom);
    }
    for (const auto& action : query.plan) {
      validate_ground_action(hidden_, problem_.objects, action);
    }
  } catch (const ModelError& e) {
    throw ProtocolError(std::string("malformed query: ") + e.what());
  }
  if (config_.capability == Capability::kWalk &&
      !certified_.contains(query.initial)) {
    throw ProtocolError("walk agent cannot start in uncertified state {" +
                        to_string(query.initial) + "}");
  }
}

Answer AgentHarness::ask(const Query& query) {
  std::lock_guard lock(mutex_);
  validate(query);
  if (config_.cache) {
    if (auto it = cache_.find(query); it != cache_.end()) {
      log_.record_cache_hit();
      return {log_.entries()[it->second].response, it->second, true};
    }
  }
  const auto start = std::chrono::steady_clock::now();
  Response response =
      query.kind == QueryKind::kPlanOutcome
          ? Response{backend_->answer_po(query.initial, query.plan)}
          : Response{backend_->answer_ap(query.initial, query.plan)};
  const auto stop = std::chrono::steady_clock::now();
  const double micros =
      std::chrono::duration<double, std::micro>(stop - start).count();
  const std::size_t index = log_.append({query, response, micros});
  if (config_.cache) cache_.emplace(query, index);
  return {std::move(response), index, false};
}

ResponsePO AgentHarness::answer_po(const Query& query) {
  if (query.kind != QueryKind::kPlanOutcome) {
    throw ProtocolError("answer_po called with an AP query");
  }
  return std::get<ResponsePO>(ask(query).response);
}

ResponseAP AgentHarness::answer_ap(const Query& query) {
  if (query.kind != QueryKind::kActionPrecondition) {
    throw ProtocolError("answer_ap called with a PO query");
  }
  return std::get<ResponseAP>(ask(query).response);
}

std::vector<State> AgentHarness::sample_states(std::size_t steps,
                                               std::uint64_t seed,
                                               std::size_t cap) {
  std::lock_guard lock(mutex_);
  auto states = random_walk(hidden_, problem_, steps, seed, cap);
  certified_.insert(states.begin(), states.end());
  return states;
}

ReachOutcome AgentHarness::reach(const std::set<Atom>& require_true,
                                 const std::set<Atom>& require_false) {
  std::lock_guard lock(mutex_);
  SearchResult result = reach_constraint(hidden_, problem_, problem_.init,
                                         require_true, require_false,
                                         config_.search_bound);
  ReachOutcome outcome{result.status, std::nullopt};
  if (result.status == SearchStatus::kFound) {
    certified_.insert(result.final_state);
    outcome.state = std::move(result.final_state);
  }
  return outcome;
}

std::unique_ptr<AgentHarness> make_simulated_agent(const LiftedModel& hidden,
                                                   const ProblemInstance& problem,
                                                   HarnessConfig config) {
  return std::make_unique<AgentHarness>(
      hidden, problem, std::make_unique<SimulatorResponder>(hidden), config);
}

}  // namespace agentprobe
