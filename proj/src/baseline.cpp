#include "agentprobe/baseline.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "agentprobe/lifting.hpp"
#include "agentprobe/pddl.hpp"

namespace agentprobe {
namespace {

std::vector<std::string> split_top_level(std::string_view text, char separator) {
  std::vector<std::string> parts;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == separator && depth == 0) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

State parse_state_text(std::string_view text) {
  State state;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) state.insert(pddl::parse_atom_text(token));
  return state;
}

}  // namespace

void validate_trace(const LiftedModel& model, const Trace& trace) {
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const State& before = trace.before(i);
    const TraceStep& step = trace.steps[i];
    Transition t = apply_action(model, before, step.action);
    if (!t.success) {
      throw ModelError("trace step " + std::to_string(i) + ": " +
                       to_string(step.action) + " is not applicable");
    }
    if (t.state != step.after) {
      throw ModelError("trace step " + std::to_string(i) + ": successor of " +
                       to_string(step.action) + " differs from the recorded state");
    }
  }
}

bool TransitionFilter::admits(const LiftedModel& model, const State& before,
                              const GroundAction& ground) const {
  if (action != "*" && action != ground.name) return true;
  Binding binding;
  if (const ActionSchema* schema = model.find_action(ground.name)) {
    binding = bind(schema->header, ground);
  }
  return std::all_of(required.begin(), required.end(), [&](const Literal& lit) {
    return before.contains(substitute(lit.atom, binding)) == lit.positive;
  });
}

TransitionFilter parse_transition_filter(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error("transition filter '" + std::string(text) +
                "' must have the form action:literal,...");
  }
  TransitionFilter filter{trim(text.substr(0, colon)), {}};
  if (filter.action.empty()) throw Error("transition filter names no action");
  for (const auto& part : split_top_level(text.substr(colon + 1), ',')) {
    const std::string literal = trim(part);
    if (!literal.empty()) filter.required.push_back(pddl::parse_literal_text(literal));
  }
  return filter;
}

std::size_t Corpus::transitions() const {
  std::size_t total = 0;
  for (const auto& trace : traces) total += trace.steps.size();
  return total;
}

Corpus generate_traces(const LiftedModel& model, const ProblemInstance& problem,
                       std::size_t count, std::size_t length, std::uint64_t seed,
                       const std::vector<TransitionFilter>& filters) {
  std::vector<GroundOperator> operators;
  for (const auto& action : ground_model(model, problem.objects).actions) {
    operators.push_back(ground_operator(model, action));
  }
  std::mt19937_64 rng(seed);
  Corpus corpus;
  for (std::size_t c = 0; c < count; ++c) {
    Trace trace{problem.init, {}};
    State current = problem.init;
    for (std::size_t step = 0; step < length; ++step) {
      std::vector<const GroundOperator*> admitted;
      for (const auto& op : operators) {
        if (!op.applicable(current)) continue;
        const bool allowed = std::all_of(
            filters.begin(), filters.end(),
            [&](const TransitionFilter& f) { return f.admits(model, current, op.action); });
        if (allowed) admitted.push_back(&op);
      }
      if (admitted.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, admitted.size() - 1);
      const GroundOperator* op = admitted[pick(rng)];
      current = op->successor(current);
      trace.steps.push_back({op->action, current});
    }
    if (!trace.steps.empty()) corpus.traces.push_back(std::move(trace));
  }
  if (count > 0 && length > 0 && corpus.transitions() == 0) {
    corpus.warnings.push_back(
        "no admitted transition from the initial state; the corpus is empty");
  }
  return corpus;
}

Corpus exhaustive_corpus(const LiftedModel& model, const ProblemInstance& problem,
                         std::size_t max_atoms_per_action) {
  Corpus corpus;
  for (const auto& schema : model.actions) {
    auto g = canonical_grounding(schema.header, problem.objects);
    if (!g) {
      corpus.warnings.push_back(schema.name() + ": no injective grounding");
      continue;
    }
    const auto lifted = instantiate_with_parameters(model.predicates, schema.header);
    if (lifted.size() > max_atoms_per_action) {
      corpus.warnings.push_back(schema.name() + ": " + std::to_string(lifted.size()) +
                                " atoms exceed the exhaustive budget");
      continue;
    }
    const GroundOperator op = ground_operator(model, g->action);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << lifted.size()); ++mask) {
      State state;
      for (std::size_t i = 0; i < lifted.size(); ++i) {
        if ((mask >> i) & 1U) state.insert(g->ground(lifted[i]));
      }
      if (!op.applicable(state)) continue;
      corpus.traces.push_back({state, {{g->action, op.successor(state)}}});
    }
  }
  return corpus;
}

LiftedModel learn_from_traces(const std::vector<Trace>& traces,
                              const Vocabulary& vocabulary,
                              const std::vector<ActionHeader>& headers) {
  struct Tally {
    std::size_t occurrences = 0;
    std::vector<std::size_t> true_before;
    std::vector<std::size_t> true_after;
    std::vector<std::size_t> rose;
    std::vector<std::size_t> fell;
  };
  std::map<std::string, const ActionHeader*> by_name;
  std::map<std::string, std::vector<Atom>> lifted;
  std::map<std::string, Tally> tallies;
  for (const auto& header : headers) {
    by_name[header.name] = &header;
    lifted[header.name] = instantiate_with_parameters(vocabulary.predicates, header);
    const std::size_t n = lifted[header.name].size();
    tallies[header.name] = {0, std::vector<std::size_t>(n), std::vector<std::size_t>(n),
                            std::vector<std::size_t>(n), std::vector<std::size_t>(n)};
  }

  for (const auto& trace : traces) {
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const GroundAction& action = trace.steps[i].action;
      auto header = by_name.find(action.name);
      if (header == by_name.end()) {
        throw Error("trace uses action '" + action.name + "' not among the headers");
      }
      auto g = grounding_of(*header->second, action);
      if (!g) continue;
      const State& before = trace.before(i);
      const State& after = trace.steps[i].after;
      Tally& tally = tallies[action.name];
      ++tally.occurrences;
      const auto& atoms = lifted[action.name];
      for (std::size_t q = 0; q < atoms.size(); ++q) {
        const Atom ground = g->ground(atoms[q]);
        const bool was = before.contains(ground);
        const bool is = after.contains(ground);
        tally.true_before[q] += was;
        tally.true_after[q] += is;
        tally.rose[q] += !was && is;
        tally.fell[q] += was && !is;
      }
    }
  }

  LiftedModel model = skeleton_from(vocabulary, headers);
  for (auto& schema : model.actions) {
    const Tally& tally = tallies[schema.name()];
    if (tally.occurrences == 0) continue;
    const auto& atoms = lifted[schema.name()];
    for (std::size_t q = 0; q < atoms.size(); ++q) {
      if (tally.true_before[q] == tally.occurrences) schema.pre.insert({atoms[q], true});
      if (tally.true_before[q] == 0) schema.pre.insert({atoms[q], false});
      const bool rose = tally.rose[q] > 0;
      const bool fell = tally.fell[q] > 0;
      const bool always_true = tally.true_after[q] == tally.occurrences;
      const bool always_false = tally.true_after[q] == 0;
      if ((rose && !always_true) || (fell && !always_false)) {
        throw Error("inconsistent observed effects of " + schema.name() + " on " +
                    to_string(atoms[q]));
      }
      if (rose) schema.eff.insert({atoms[q], true});
      if (fell) schema.eff.insert({atoms[q], false});
    }
  }
  return model;
}

LiftedModel strip_static(const LiftedModel& learned) {
  const auto fixed = static_predicates(learned);
  LiftedModel out = learned;
  for (auto& schema : out.actions) {
    std::erase_if(schema.pre, [&](const Literal& lit) {
      return fixed.contains(lit.atom.predicate);
    });
  }
  return out;
}

void write_traces(std::ostream& out, const std::vector<Trace>& traces) {
  out << "# agentprobe traces v1\n";
  for (std::size_t id = 0; id < traces.size(); ++id) {
    const Trace& trace = traces[id];
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      out << id << '\t' << to_string(trace.before(i)) << '\t'
          << to_string(trace.steps[i].action) << '\t'
          << to_string(trace.steps[i].after) << '\n';
    }
  }
}

std::vector<Trace> read_traces(std::istream& in) {
  std::vector<Trace> traces;
  std::string line;
  std::optional<std::string> current_id;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_top_level(line, '\t');
    if (fields.size() != 4) {
      throw Error("trace line " + std::to_string(line_number) + ": expected 4 fields");
    }
    State before = parse_state_text(fields[1]);
    TraceStep step{pddl::parse_action_text(trim(fields[2])), parse_state_text(fields[3])};
    if (current_id != fields[0]) {
      current_id = fields[0];
      traces.push_back({std::move(before), {}});
    } else if (traces.back().steps.back().after != before) {
      throw Error("trace line " + std::to_string(line_number) +
                  ": pre-state does not continue the previous step");
    }
    traces.back().steps.push_back(std::move(step));
  }
  return traces;
}

}  // namespace agentprobe
