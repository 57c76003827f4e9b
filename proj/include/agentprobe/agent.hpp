// The black-box boundary: queries, responses, agent backends and the harness
// that validates, caches and logs every exchange.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "agentprobe/planner.hpp"
#include "agentprobe/strips.hpp"

namespace agentprobe {

/// Malformed or disallowed query (plan too long, unknown object, state the
/// agent cannot be placed in, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

enum class QueryKind { kPlanOutcome, kActionPrecondition };

std::string to_string(QueryKind kind);

struct Query {
  QueryKind kind = QueryKind::kPlanOutcome;
  State initial;
  Plan plan;

  auto operator<=>(const Query&) const = default;
  bool operator==(const Query&) const = default;
};

/// <l, s_l>: longest executable prefix and the state it leads to.
struct ResponsePO {
  std::size_t length = 0;
  State state;

  bool operator==(const ResponsePO&) const = default;
};

/// Name of the never-executable action appended to every AP query plan.
inline constexpr std::string_view kFailAction = "a_fail";

/// The precondition reported for kFailAction; no state satisfies it.
Literal unsatisfiable_literal();

/// <l, p_F>: steps executed, the failed action and its lifted preconditions.
/// `final_state` is present when the whole original plan executed.
struct ResponseAP {
  std::size_t length = 0;
  std::string failed_action;
  std::set<Literal> failed_preconditions;
  std::optional<State> final_state;

  bool succeeded() const { return failed_action == kFailAction; }
  bool operator==(const ResponseAP&) const = default;
};

using Response = std::variant<ResponsePO, ResponseAP>;

/// Computes answers from some hidden representation of the agent's model.
class Responder {
 public:
  virtual ~Responder() = default;
  virtual ResponsePO answer_po(const State& initial, const Plan& plan) const = 0;
  virtual ResponseAP answer_ap(const State& initial, const Plan& plan) const = 0;
};

/// Answers by simulating the hidden lifted model.
class SimulatorResponder final : public Responder {
 public:
  explicit SimulatorResponder(LiftedModel model) : model_(std::move(model)) {}
  ResponsePO answer_po(const State& initial, const Plan& plan) const override;
  ResponseAP answer_ap(const State& initial, const Plan& plan) const override;

 private:
  LiftedModel model_;
};

enum class Capability {
  kTeleport,  // accepts any well-formed initial state
  kWalk,      // accepts only states the harness certified as reachable
};

std::string to_string(Capability capability);

struct HarnessConfig {
  std::size_t max_plan_length = 20;
  Capability capability = Capability::kTeleport;
  bool cache = true;
  std::size_t search_bound = kDefaultExpansionBound;
};

struct LogEntry {
  Query query;
  Response response;
  double micros = 0.0;
};

/// Ordered record of answered queries. Cache hits are counted separately and
/// do not add entries.
class QueryLog {
 public:
  std::size_t append(LogEntry entry);
  void record_cache_hit() { ++cache_hits_; }

  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(QueryKind kind) const {
    return kind == QueryKind::kPlanOutcome ? po_count_ : ap_count_;
  }
  std::size_t cache_hits() const { return cache_hits_; }

  /// Line-delimited text form, see docs/formats.md.
  void write(std::ostream& out) const;

 private:
  std::vector<LogEntry> entries_;
  std::size_t po_count_ = 0;
  std::size_t ap_count_ = 0;
  std::size_t cache_hits_ = 0;
};

std::string format_log_line(std::size_t index, const LogEntry& entry);

/// A response together with the log index of the query that produced it.
struct Answer {
  Response response;
  std::size_t index = 0;
  bool cached = false;
};

struct ReachOutcome {
  SearchStatus status = SearchStatus::kNoPlan;
  std::optional<State> state;
};

/// Everything an interrogator may observe of an agent.
class AgentChannel {
 public:
  virtual ~AgentChannel() = default;
  virtual std::vector<ActionHeader> headers() const = 0;
  virtual ObjectSet objects() const = 0;
  virtual Capability capability() const = 0;
  virtual Answer ask(const Query& query) = 0;
  /// Reachable states collected by letting the agent act randomly.
  virtual std::vector<State> sample_states(std::size_t steps, std::uint64_t seed,
                                           std::size_t cap) = 0;
  /// A reachable state satisfying the constraints, if the environment finds
  /// one within its search bound.
  virtual ReachOutcome reach(const std::set<Atom>& require_true,
                             const std::set<Atom>& require_false) = 0;
};

/// Wraps a hidden model and a responder backend. Enforces the plan-length
/// bound and the capability contract, serves repeated queries from a cache
/// and keeps the query log.
class AgentHarness final : public AgentChannel {
 public:
  AgentHarness(LiftedModel hidden, ProblemInstance problem,
               std::unique_ptr<Responder> backend, HarnessConfig config = {});

  std::vector<ActionHeader> headers() const override;
  ObjectSet objects() const override { return problem_.objects; }
  Capability capability() const override { return config_.capability; }
  Answer ask(const Query& query) override;
  std::vector<State> sample_states(std::size_t steps, std::uint64_t seed,
                                   std::size_t cap) override;
  ReachOutcome reach(const std::set<Atom>& require_true,
                     const std::set<Atom>& require_false) override;

  ResponsePO answer_po(const Query& query);
  ResponseAP answer_ap(const Query& query);

  const QueryLog& log() const { return log_; }
  const HarnessConfig& config() const { return config_; }
  const State& initial_state() const { return problem_.init; }
  bool certified(const State& state) const;

 private:
  void validate(const Query& query) const;

  LiftedModel hidden_;
  ProblemInstance problem_;
  std::unique_ptr<Responder> backend_;
  HarnessConfig config_;
  QueryLog log_;
  std::map<Query, std::size_t> cache_;
  std::set<State> certified_;
  mutable std::mutex mutex_;
};

std::unique_ptr<AgentHarness> make_simulated_agent(const LiftedModel& hidden,
                                                   const ProblemInstance& problem,
                                                   HarnessConfig config = {});

}  // namespace agentprobe
