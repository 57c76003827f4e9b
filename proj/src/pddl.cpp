#include "agentprobe/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

namespace agentprobe::pddl {

namespace {

constexpr std::size_t kMaxDepth = 128;

struct Node {
  bool is_list = false;
  std::string symbol;
  std::vector<Node> items;
  std::size_t line = 1;
  std::size_t column = 1;

  bool is_symbol(std::string_view s) const { return !is_list && symbol == s; }
  // First item of a list when it is a symbol, else "".
  std::string head() const {
    if (!is_list || items.empty() || items.front().is_list) return {};
    return items.front().symbol;
  }
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

class Reader {
 public:
  explicit Reader(const DomainSource& source) : src_(source) {}

  Node read_document() {
    skip_blank();
    if (at_end()) fail_syntax("expected '(' but found end of input");
    Node root = read_node(0);
    skip_blank();
    if (!at_end()) fail_syntax("expected end of input");
    return root;
  }

 private:
  [[noreturn]] void fail_syntax(const std::string& message) const {
    throw ParseError(ParseError::Kind::kSyntax, src_.origin, line_, column_,
                     message);
  }

  bool at_end() const { return pos_ >= src_.text.size(); }
  char peek() const { return src_.text[pos_]; }

  void advance() {
    if (src_.text[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (!at_end()) {
      const char c = peek();
      if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  Node read_node(std::size_t depth) {
    if (depth > kMaxDepth) fail_syntax("expressions nested too deeply");
    Node node;
    node.line = line_;
    node.column = column_;
    const char c = peek();
    if (c == ')') fail_syntax("unexpected ')'");
    if (c == '(') {
      node.is_list = true;
      advance();
      while (true) {
        skip_blank();
        if (at_end()) fail_syntax("expected ')' but found end of input");
        if (peek() == ')') {
          advance();
          return node;
        }
        node.items.push_back(read_node(depth + 1));
      }
    }
    std::string text;
    while (!at_end()) {
      const char d = peek();
      if (d == '(' || d == ')' || d == ';' ||
          std::isspace(static_cast<unsigned char>(d))) {
        break;
      }
      text += d;
      advance();
    }
    node.symbol = lower(text);
    return node;
  }

  const DomainSource& src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

const std::set<std::string>& unsupported_formula_heads() {
  static const std::set<std::string> heads = {
      "or",       "imply",  "exists",   "forall",    "when",
      "=",        "increase", "decrease", "assign",  "scale-up",
      "scale-down", "preference", "either"};
  return heads;
}

class Interpreter {
 public:
  explicit Interpreter(const DomainSource& source) : src_(source) {}

  LiftedModel domain(const Node& root) {
    expect_define(root, "domain");
    LiftedModel model;
    model.name = root.items[1].items[1].symbol;
    for (std::size_t i = 2; i < root.items.size(); ++i) {
      const Node& section = root.items[i];
      const std::string head = section.head();
      if (head == ":requirements") {
        requirements(section);
      } else if (head == ":types") {
        types(section, model);
      } else if (head == ":predicates") {
        predicates(section, model);
      } else if (head == ":action") {
        model.actions.push_back(action(section, model));
      } else if (head == ":constants" || head == ":functions" ||
                 head == ":derived" || head == ":durative-action" ||
                 head == ":constraints" || head == ":axiom") {
        unsupported(section, head);
      } else {
        syntax(section, "expected a domain section such as (:action ...)");
      }
    }
    std::sort(model.predicates.begin(), model.predicates.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    std::sort(model.actions.begin(), model.actions.end(),
              [](const auto& a, const auto& b) { return a.name() < b.name(); });
    std::sort(model.types.begin(), model.types.end());
    try {
      validate(model);
    } catch (const ModelError& e) {
      semantic(root, e.what());
    }
    return model;
  }

  ProblemInstance problem(const Node& root, const LiftedModel& model) {
    expect_define(root, "problem");
    typing_ = model.typed();
    ProblemInstance problem;
    problem.name = root.items[1].items[1].symbol;
    for (std::size_t i = 2; i < root.items.size(); ++i) {
      const Node& section = root.items[i];
      const std::string head = section.head();
      if (head == ":domain") {
        if (section.items.size() != 2 || section.items[1].is_list) {
          syntax(section, "expected (:domain NAME)");
        }
        problem.domain = section.items[1].symbol;
        if (!model.name.empty() && problem.domain != model.name) {
          semantic(section, "problem is for domain '" + problem.domain +
                                "' but the model is '" + model.name + "'");
        }
      } else if (head == ":requirements") {
        requirements(section);
      } else if (head == ":objects") {
        for (auto& [name, type, pos] : typed_list(section, 1, false)) {
          if (!model.typed() && type != kRootType) {
            semantic(*pos, "typed object in an untyped domain");
          }
          if (type != kRootType &&
              std::find(model.types.begin(), model.types.end(), type) ==
                  model.types.end()) {
            semantic(*pos, "undeclared type '" + type + "'");
          }
          problem.objects.push_back({name, type});
        }
      } else if (head == ":init") {
        for (std::size_t k = 1; k < section.items.size(); ++k) {
          const Node& item = section.items[k];
          if (item.head() == "not") unsupported(item, "negative initial fact");
          Atom atom = atom_of(item, false);
          check_ground(item, model, problem, atom);
          problem.init.insert(std::move(atom));
        }
      } else if (head == ":goal") {
        if (section.items.size() != 2) syntax(section, "expected (:goal FORMULA)");
        std::vector<std::pair<Literal, const Node*>> literals;
        formula(section.items[1], false, literals);
        for (auto& [lit, pos] : literals) {
          check_ground(*pos, model, problem, lit.atom);
          problem.goal.insert(lit);
        }
      } else if (head == ":metric" || head == ":constraints") {
        unsupported(section, head);
      } else {
        syntax(section, "expected a problem section such as (:init ...)");
      }
    }
    std::set<std::string> names;
    for (const auto& o : problem.objects) {
      if (!names.insert(o.name).second) {
        semantic(root, "duplicate object '" + o.name + "'");
      }
    }
    return problem;
  }

 private:
  [[noreturn]] void syntax(const Node& at, const std::string& message) const {
    throw ParseError(ParseError::Kind::kSyntax, src_.origin, at.line,
                     at.column, message);
  }
  [[noreturn]] void unsupported(const Node& at, const std::string& what) const {
    throw ParseError(ParseError::Kind::kUnsupported, src_.origin, at.line,
                     at.column, "unsupported feature '" + what + "'");
  }
  [[noreturn]] void semantic(const Node& at, const std::string& message) const {
    throw ParseError(ParseError::Kind::kSemantic, src_.origin, at.line,
                     at.column, message);
  }

  void expect_define(const Node& root, std::string_view kind) const {
    if (root.head() != "define") syntax(root, "expected (define ...)");
    if (root.items.size() < 2 || root.items[1].head() != kind ||
        root.items[1].items.size() != 2 || root.items[1].items[1].is_list) {
      syntax(root, "expected (" + std::string(kind) + " NAME)");
    }
  }

  void requirements(const Node& section) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
      const Node& r = section.items[i];
      if (r.is_list) syntax(r, "expected a requirement flag");
      if (r.symbol == ":strips") continue;
      if (r.symbol == ":typing") {
        typing_ = true;
      } else if (r.symbol == ":negative-preconditions") {
        negative_preconditions_ = true;
      } else {
        unsupported(r, r.symbol);
      }
    }
  }

  struct TypedEntry {
    std::string name;
    std::string type;
    const Node* pos;
  };

  std::vector<TypedEntry> typed_list(const Node& list, std::size_t start,
                                     bool variables) {
    std::vector<TypedEntry> out;
    std::size_t pending = 0;
    for (std::size_t i = start; i < list.items.size(); ++i) {
      const Node& item = list.items[i];
      if (item.is_list) syntax(item, "expected a name");
      if (item.symbol == "-") {
        if (i + 1 >= list.items.size()) syntax(item, "expected a type after '-'");
        const Node& type = list.items[i + 1];
        if (type.is_list) {
          if (type.head() == "either") unsupported(type, "either");
          syntax(type, "expected a type name");
        }
        if (!typing_) semantic(item, "typed list requires :typing");
        if (pending == 0) syntax(item, "'-' without preceding names");
        for (std::size_t k = out.size() - pending; k < out.size(); ++k) {
          out[k].type = type.symbol;
        }
        pending = 0;
        ++i;
        continue;
      }
      const bool is_var = item.symbol.starts_with('?');
      if (variables != is_var) {
        syntax(item, variables ? "expected a ?variable" : "expected a name");
      }
      out.push_back({item.symbol, std::string(kRootType), &item});
      ++pending;
    }
    return out;
  }

  void types(const Node& section, LiftedModel& model) {
    if (!typing_) semantic(section, ":types requires :typing");
    for (auto& [name, parent, pos] : typed_list(section, 1, false)) {
      if (parent != kRootType) unsupported(*pos, "type hierarchy");
      if (name == kRootType) continue;
      model.types.push_back(name);
    }
  }

  void predicates(const Node& section, LiftedModel& model) {
    for (std::size_t i = 1; i < section.items.size(); ++i) {
      const Node& decl = section.items[i];
      if (!decl.is_list || decl.items.empty() || decl.items[0].is_list) {
        syntax(decl, "expected (NAME ?x - type ...)");
      }
      PredicateDecl p{decl.items[0].symbol, {}};
      for (auto& entry : typed_list(decl, 1, true)) {
        p.param_types.push_back(entry.type);
      }
      if (model.find_predicate(p.name) != nullptr) {
        semantic(decl, "duplicate predicate '" + p.name + "'");
      }
      model.predicates.push_back(std::move(p));
    }
  }

  Atom atom_of(const Node& node, bool lifted) const {
    if (!node.is_list || node.items.empty() || node.items[0].is_list) {
      syntax(node, "expected an atom (NAME ARGS...)");
    }
    const std::string head = node.items[0].symbol;
    if (unsupported_formula_heads().contains(head)) unsupported(node, head);
    if (head == "and" || head == "not") syntax(node, "expected an atom");
    Atom atom{head, {}};
    for (std::size_t i = 1; i < node.items.size(); ++i) {
      const Node& arg = node.items[i];
      if (arg.is_list) syntax(arg, "expected an argument name");
      if (arg.symbol.starts_with('?') != lifted) {
        if (lifted) unsupported(arg, "constant argument");
        syntax(arg, "expected an object name");
      }
      atom.args.push_back(arg.symbol);
    }
    return atom;
  }

  void formula(const Node& node, bool lifted,
               std::vector<std::pair<Literal, const Node*>>& out) const {
    if (!node.is_list) syntax(node, "expected a formula");
    if (node.items.empty()) return;
    const std::string head = node.head();
    if (head == "and") {
      for (std::size_t i = 1; i < node.items.size(); ++i) {
        formula(node.items[i], lifted, out);
      }
    } else if (head == "not") {
      if (node.items.size() != 2) syntax(node, "expected (not ATOM)");
      const Node& inner = node.items[1];
      if (inner.is_list && inner.head() != "and" && inner.head() != "not") {
        out.push_back({Literal{atom_of(inner, lifted), false}, &node});
      } else {
        unsupported(node, "negated compound formula");
      }
    } else {
      out.push_back({Literal{atom_of(node, lifted), true}, &node});
    }
  }

  ActionSchema action(const Node& section, const LiftedModel& model) {
    if (section.items.size() < 2 || section.items[1].is_list) {
      syntax(section, "expected (:action NAME ...)");
    }
    ActionSchema schema;
    schema.header.name = section.items[1].symbol;
    if (model.find_action(schema.header.name) != nullptr) {
      semantic(section, "duplicate action '" + schema.header.name + "'");
    }
    for (std::size_t i = 2; i < section.items.size(); i += 2) {
      const Node& key = section.items[i];
      if (key.is_list) syntax(key, "expected :parameters, :precondition or :effect");
      if (i + 1 >= section.items.size()) syntax(key, "missing value for " + key.symbol);
      const Node& value = section.items[i + 1];
      if (key.symbol == ":parameters") {
        if (!value.is_list) syntax(value, "expected a parameter list");
        for (auto& [name, type, pos] : typed_list(value, 0, true)) {
          schema.header.params.push_back({name, type});
        }
      } else if (key.symbol == ":precondition" || key.symbol == ":effect") {
        const bool pre = key.symbol == ":precondition";
        std::vector<std::pair<Literal, const Node*>> literals;
        formula(value, true, literals);
        for (auto& [lit, pos] : literals) {
          if (pre && !lit.positive && !negative_preconditions_) {
            unsupported(*pos, "negative precondition without :negative-preconditions");
          }
          (pre ? schema.pre : schema.eff).insert(lit);
        }
      } else {
        unsupported(key, key.symbol);
      }
    }
    LiftedModel probe{model.name, model.types, model.predicates, {schema}};
    try {
      validate(probe);
    } catch (const ModelError& e) {
      semantic(section, e.what());
    }
    return schema;
  }

  void check_ground(const Node& at, const LiftedModel& model,
                    const ProblemInstance& problem, const Atom& atom) const {
    try {
      validate_ground_atom(model, problem.objects, atom);
    } catch (const ModelError& e) {
      semantic(at, e.what());
    }
  }

  const DomainSource& src_;
  bool typing_ = false;
  bool negative_preconditions_ = false;
};

std::string param_list(const std::vector<TypedName>& params, bool typed) {
  std::string out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) out += ' ';
    out += params[i].name;
    if (typed) out += " - " + params[i].type;
  }
  return out;
}

std::string atom_sexpr(const Atom& atom) {
  std::string out = "(" + atom.predicate;
  for (const auto& a : atom.args) out += " " + a;
  return out + ")";
}

std::string literal_sexpr(const Literal& lit) {
  return lit.positive ? atom_sexpr(lit.atom) : "(not " + atom_sexpr(lit.atom) + ")";
}

std::string conjunction(const std::set<Literal>& literals) {
  std::string out = "(and";
  for (const auto& lit : literals) out += " " + literal_sexpr(lit);
  return out + ")";
}

std::vector<std::string> split_args(std::string_view text, std::string_view whole) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      if (current.empty()) throw Error("malformed term '" + std::string(whole) + "'");
      out.push_back(lower(current));
      current.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      current += c;
    }
  }
  if (current.empty()) {
    if (!out.empty()) throw Error("malformed term '" + std::string(whole) + "'");
  } else {
    out.push_back(lower(current));
  }
  return out;
}

Atom parse_term(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  const auto open = text.find('(');
  if (open == std::string_view::npos) {
    if (text.empty() || text.find(')') != std::string_view::npos ||
        text.find(',') != std::string_view::npos) {
      throw Error("malformed term '" + std::string(text) + "'");
    }
    return Atom{lower(text), {}};
  }
  if (open == 0 || text.back() != ')') {
    throw Error("malformed term '" + std::string(text) + "'");
  }
  return Atom{lower(text.substr(0, open)),
              split_args(text.substr(open + 1, text.size() - open - 2), text)};
}

}  // namespace

ParseError::ParseError(Kind kind, std::string origin, std::size_t line,
                       std::size_t column, const std::string& message)
    : Error(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
            ": " + message),
      kind_(kind),
      origin_(std::move(origin)),
      line_(line),
      column_(column) {}

DomainSource read_source(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return {text.str(), path.string()};
}

LiftedModel parse_domain(const DomainSource& source) {
  Reader reader(source);
  const Node root = reader.read_document();
  return Interpreter(source).domain(root);
}

ProblemInstance parse_problem(const DomainSource& source,
                              const LiftedModel& model) {
  Reader reader(source);
  const Node root = reader.read_document();
  return Interpreter(source).problem(root, model);
}

std::string serialize_domain(const LiftedModel& model) {
  const bool typed = model.typed();
  bool negative_pre = false;
  for (const auto& a : model.actions) {
    for (const auto& lit : a.pre) negative_pre |= !lit.positive;
  }
  std::vector<PredicateDecl> predicates = model.predicates;
  std::sort(predicates.begin(), predicates.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  std::vector<const ActionSchema*> actions;
  for (const auto& a : model.actions) actions.push_back(&a);
  std::sort(actions.begin(), actions.end(),
            [](const auto* a, const auto* b) { return a->name() < b->name(); });
  std::vector<std::string> types = model.types;
  std::sort(types.begin(), types.end());

  std::ostringstream out;
  out << "(define (domain " << model.name << ")\n";
  out << "  (:requirements :strips";
  if (typed) out << " :typing";
  if (negative_pre) out << " :negative-preconditions";
  out << ")\n";
  if (typed) {
    out << "  (:types";
    for (const auto& t : types) out << " " << t;
    out << ")\n";
  }
  out << "  (:predicates";
  for (const auto& p : predicates) {
    std::vector<TypedName> params;
    for (std::size_t i = 0; i < p.param_types.size(); ++i) {
      params.push_back({"?x" + std::to_string(i), p.param_types[i]});
    }
    out << "\n    (" << p.name;
    if (!params.empty()) out << " " << param_list(params, typed);
    out << ")";
  }
  out << ")\n";
  for (const auto* a : actions) {
    out << "  (:action " << a->name() << "\n";
    out << "    :parameters (" << param_list(a->header.params, typed) << ")\n";
    out << "    :precondition " << conjunction(a->pre) << "\n";
    out << "    :effect " << conjunction(a->eff) << ")\n";
  }
  out << ")\n";
  return out.str();
}

std::string serialize_problem(const ProblemInstance& problem,
                              const LiftedModel& model) {
  std::ostringstream out;
  out << "(define (problem " << problem.name << ")\n";
  out << "  (:domain " << (problem.domain.empty() ? model.name : problem.domain)
      << ")\n";
  out << "  (:objects";
  for (const auto& o : problem.objects) {
    out << " " << o.name;
    if (model.typed()) out << " - " << o.type;
  }
  out << ")\n  (:init";
  for (const auto& a : problem.init.atoms()) out << "\n    " << atom_sexpr(a);
  out << ")\n  (:goal " << conjunction(problem.goal) << "))\n";
  return out.str();
}

Atom parse_atom_text(std::string_view text) { return parse_term(text); }

GroundAction parse_action_text(std::string_view text) {
  Atom a = parse_term(text);
  return {std::move(a.predicate), std::move(a.args)};
}

Literal parse_literal_text(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  bool positive = true;
  if (text.starts_with('!')) {
    positive = false;
    text.remove_prefix(1);
  }
  return {parse_term(text), positive};
}

}  // namespace agentprobe::pddl
