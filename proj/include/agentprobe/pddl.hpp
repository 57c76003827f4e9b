// Parsing and canonical serialization of the STRIPS subset of PDDL
// (:strips, :typing, :negative-preconditions). See docs/pddl-subset.md.
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "agentprobe/strips.hpp"

namespace agentprobe::pddl {

struct DomainSource {
  std::string text;
  std::string origin = "<inline>";
};

DomainSource read_source(const std::filesystem::path& path);

class ParseError : public Error {
 public:
  enum class Kind { kSyntax, kUnsupported, kSemantic };

  ParseError(Kind kind, std::string origin, std::size_t line,
             std::size_t column, const std::string& message);

  Kind kind() const { return kind_; }
  const std::string& origin() const { return origin_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  Kind kind_;
  std::string origin_;
  std::size_t line_;
  std::size_t column_;
};

LiftedModel parse_domain(const DomainSource& source);
ProblemInstance parse_problem(const DomainSource& source,
                              const LiftedModel& model);

/// Canonical text: predicates, actions and literals sorted; byte-identical for
/// equal models.
std::string serialize_domain(const LiftedModel& model);
std::string serialize_problem(const ProblemInstance& problem,
                              const LiftedModel& model);

/// Parses a ground atom or action in the compact `name(a,b)` text form used by
/// logs and the command line.
Atom parse_atom_text(std::string_view text);
GroundAction parse_action_text(std::string_view text);
/// Parses a lifted literal such as `src_blue(?s)` or `!at(?t,?d)`.
Literal parse_literal_text(std::string_view text);

}  // namespace agentprobe::pddl
