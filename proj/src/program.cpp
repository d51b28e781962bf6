#include "mpnet/program.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "mpnet/error.hpp"
#include "text_parser.hpp"

namespace mpnet::program {

Directive Directive::put(std::string place, expr::ExprPtr value) {
  return {Kind::Put, std::move(place), std::move(value), {}};
}
Directive Directive::wait(std::string place) { return {Kind::Wait, std::move(place), nullptr, {}}; }
Directive Directive::get(std::string place, std::string variable) {
  return {Kind::Get, std::move(place), nullptr, std::move(variable)};
}

std::string to_string(const Directive& d) {
  switch (d.kind) {
    case Directive::Kind::Put: return "put(" + d.place + " = " + expr::to_string(*d.value) + ")";
    case Directive::Kind::Wait: return "wait(" + d.place + ")";
    case Directive::Kind::Get: return "get(" + d.place + " -> " + d.variable + ")";
  }
  return {};
}

Statement Statement::noop() { return {}; }
Statement Statement::assign(std::string var, expr::ExprPtr value) {
  Statement s;
  s.kind = Kind::Assign;
  s.assignments.emplace_back(std::move(var), std::move(value));
  return s;
}
Statement Statement::branch(expr::ExprPtr condition) {
  Statement s;
  s.kind = Kind::Branch;
  s.condition = std::move(condition);
  return s;
}
Statement Statement::call(std::string text) {
  Statement s;
  s.kind = Kind::Call;
  s.text = std::move(text);
  return s;
}

std::string to_string(const Statement& s) {
  switch (s.kind) {
    case Statement::Kind::NoOp: return "skip";
    case Statement::Kind::Assign: {
      std::string out;
      for (const auto& [var, e] : s.assignments) {
        if (!out.empty()) out += ", ";
        out += var + " = " + expr::to_string(*e);
      }
      return out;
    }
    case Statement::Kind::Branch: return "[" + expr::to_string(*s.condition) + "]";
    case Statement::Kind::Call: return s.text;
  }
  return {};
}

Stmt assign_stmt(std::string var, expr::ExprPtr value, std::optional<Annotation> a) {
  Stmt s;
  s.kind = Stmt::Kind::Assign;
  s.assignments.emplace_back(std::move(var), std::move(value));
  s.annotation = std::move(a);
  return s;
}

Stmt call_stmt(std::string text, std::optional<Annotation> a) {
  Stmt s;
  s.kind = Stmt::Kind::Call;
  s.text = std::move(text);
  s.annotation = std::move(a);
  return s;
}

Stmt if_stmt(expr::ExprPtr cond, Block then, std::optional<Block> otherwise) {
  Stmt s;
  s.kind = Stmt::Kind::If;
  s.condition = std::move(cond);
  s.body = std::make_shared<Block>(std::move(then));
  if (otherwise) s.otherwise = std::make_shared<Block>(std::move(*otherwise));
  return s;
}

Stmt while_stmt(expr::ExprPtr cond, Block body) {
  Stmt s;
  s.kind = Stmt::Kind::While;
  s.condition = std::move(cond);
  s.body = std::make_shared<Block>(std::move(body));
  return s;
}

namespace {

class Compiler {
 public:
  explicit Compiler(Fragment& f) : f_(f) {}

  std::string node() {
    std::string name = "n" + std::to_string(f_.nodes.size());
    f_.nodes.push_back(name);
    return name;
  }

  // Compile `b` starting at `from`; the last edge ends in `to` when given.
  std::string block(const Block& b, std::string from, const std::optional<std::string>& to) {
    if (b.empty()) {
      if (to && *to != from) edge(from, *to, Statement::noop(), {});
      return to.value_or(from);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      from = stmt(b[i], from, i + 1 == b.size() ? to : std::nullopt);
    }
    return from;
  }

 private:
  void edge(const std::string& from, const std::string& to, Statement s,
            std::optional<Annotation> a) {
    f_.edges.push_back({from, to, std::move(s), std::move(a)});
  }

  std::string stmt(const Stmt& s, const std::string& from, const std::optional<std::string>& to) {
    switch (s.kind) {
      case Stmt::Kind::Assign: {
        std::string dest = to ? *to : node();
        Statement st;
        st.kind = Statement::Kind::Assign;
        st.assignments = s.assignments;
        edge(from, dest, std::move(st), s.annotation);
        return dest;
      }
      case Stmt::Kind::Call: {
        std::string dest = to ? *to : node();
        edge(from, dest, Statement::call(s.text), s.annotation);
        return dest;
      }
      case Stmt::Kind::If: {
        std::string join = to ? *to : node();
        arm(from, join, s.condition, *s.body);
        auto negated = expr::not_(s.condition);
        if (s.otherwise) {
          arm(from, join, negated, *s.otherwise);
        } else {
          edge(from, join, Statement::branch(negated), {});
        }
        return join;
      }
      case Stmt::Kind::While: {
        const std::string& header = from;
        std::string exit = to ? *to : node();
        arm(header, header, s.condition, *s.body);
        edge(header, exit, Statement::branch(expr::not_(s.condition)), {});
        return exit;
      }
    }
    return from;
  }

  void arm(const std::string& from, const std::string& join, const expr::ExprPtr& cond,
           const Block& body) {
    if (body.empty()) {
      edge(from, join, Statement::branch(cond), {});
      return;
    }
    std::string start = node();
    edge(from, start, Statement::branch(cond), {});
    block(body, start, join);
  }

  Fragment& f_;
};

std::string edge_transition_name(const Edge& e, std::size_t index) {
  return e.annotation ? e.annotation->label : "t" + std::to_string(index);
}

expr::ExprPtr unit_pattern() { return expr::lit(Value::unit()); }

net::Arc input_arc(net::ArcCategory c, std::string place, std::string transition,
                   expr::InputArcExpr in) {
  net::Arc a;
  a.category = c;
  a.source = std::move(place);
  a.target = std::move(transition);
  a.input = std::move(in);
  return a;
}

net::Arc output_arc(std::string transition, std::string place, expr::OutputArcExpr out) {
  net::Arc a;
  a.category = net::ArcCategory::Out;
  a.source = std::move(transition);
  a.target = std::move(place);
  a.output = std::move(out);
  return a;
}

expr::InputArcExpr simple_in(expr::ExprPtr pattern, std::vector<expr::ExprPtr> conds = {}) {
  expr::InputArcExpr in;
  in.conditions = std::move(conds);
  in.pattern = {std::move(pattern)};
  in.size = std::uint64_t{1};
  return in;
}

expr::OutputArcExpr simple_out(expr::ExprPtr pattern) {
  expr::OutputArcExpr out;
  out.pattern = {std::move(pattern)};
  return out;
}

expr::ExprPtr memory_var() { return expr::var(std::string(kMemoryVar)); }

net::Place unit_place(std::string name) {
  net::Place p;
  p.name = std::move(name);
  p.color = Color::Unit;
  return p;
}

}  // namespace

Fragment compile(const Block& block, Value memory) {
  Fragment f;
  f.memory = std::move(memory);
  Compiler c(f);
  f.entry = c.node();
  f.exit = c.block(block, f.entry, std::nullopt);
  return f;
}

void check_fragment(const Fragment& f) {
  std::set<std::string> nodes;
  for (const auto& n : f.nodes) {
    if (n.empty()) throw Error(ErrorKind::InvalidFragment, "empty node name");
    if (!nodes.insert(n).second) throw Error(ErrorKind::InvalidFragment, "duplicate node " + n);
  }
  if (!nodes.count(f.entry)) throw Error(ErrorKind::InvalidFragment, "entry node missing");
  if (!nodes.count(f.exit)) throw Error(ErrorKind::InvalidFragment, "exit node missing");
  if (!f.memory.is(Value::Kind::Record)) {
    throw Error(ErrorKind::InvalidFragment, "initial memory must be a record");
  }
  std::set<std::string> labels;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& e : f.edges) {
    if (!nodes.count(e.from) || !nodes.count(e.to)) {
      throw Error(ErrorKind::InvalidFragment, "edge " + e.from + " -> " + e.to + " is dangling");
    }
    if (e.statement.kind == Statement::Kind::Branch && !e.statement.condition) {
      throw Error(ErrorKind::InvalidFragment, "branch edge without condition");
    }
    if (e.annotation && !labels.insert(e.annotation->label).second) {
      throw Error(ErrorKind::DuplicateLabel, "label " + e.annotation->label + " used twice");
    }
    succ[e.from].push_back(e.to);
  }
  std::set<std::string> seen{f.entry};
  std::deque<std::string> todo{f.entry};
  while (!todo.empty()) {
    auto n = todo.front();
    todo.pop_front();
    for (const auto& m : succ[n]) {
      if (seen.insert(m).second) todo.push_back(m);
    }
  }
  if (seen.size() != nodes.size()) {
    for (const auto& n : f.nodes) {
      if (!seen.count(n)) throw Error(ErrorKind::InvalidFragment, "node " + n + " is unreachable");
    }
  }
}

expr::ExprPtr to_memory(const expr::ExprPtr& e) {
  return expr::substitute(e, [](const std::string& name) -> expr::ExprPtr {
    return expr::field(memory_var(), name);
  });
}

net::CommunicationNet to_program_net(const Fragment& f) {
  check_fragment(f);
  net::CommunicationNet pn;
  for (const auto& n : f.nodes) {
    auto p = unit_place(n);
    if (n == f.entry) p.initial.push_back(Value::unit());
    p.terminal = n == f.exit;
    pn.places.push_back(std::move(p));
  }
  net::Place memory;
  memory.name = std::string(kMemoryPlace);
  memory.color = Color::Record;
  memory.initial.push_back(f.memory);
  pn.places.push_back(std::move(memory));

  std::set<std::string> names(f.nodes.begin(), f.nodes.end());
  names.insert(std::string(kMemoryPlace));
  for (std::size_t i = 0; i < f.edges.size(); ++i) {
    const auto& e = f.edges[i];
    std::string t = edge_transition_name(e, i);
    if (!names.insert(t).second) {
      throw Error(ErrorKind::InvalidFragment, "transition name " + t + " clashes");
    }
    pn.transitions.push_back({t, nullptr});
    pn.arcs.push_back(input_arc(net::ArcCategory::In, e.from, t, simple_in(unit_pattern())));
    std::vector<expr::ExprPtr> conds;
    if (e.statement.kind == Statement::Kind::Branch) {
      conds.push_back(to_memory(e.statement.condition));
    }
    pn.arcs.push_back(input_arc(net::ArcCategory::In, std::string(kMemoryPlace), t,
                                simple_in(memory_var(), std::move(conds))));
    pn.arcs.push_back(output_arc(t, e.to, simple_out(unit_pattern())));
    expr::ExprPtr mem_out = memory_var();
    if (e.statement.kind == Statement::Kind::Assign) {
      std::vector<std::string> fields;
      std::vector<expr::ExprPtr> values;
      for (const auto& [var, rhs] : e.statement.assignments) {
        fields.push_back(var);
        values.push_back(to_memory(rhs));
      }
      mem_out = expr::update(memory_var(), std::move(fields), std::move(values));
    }
    pn.arcs.push_back(output_arc(t, std::string(kMemoryPlace), simple_out(mem_out)));
  }
  return pn;
}

namespace {

// Head type already used by arcs leaving `place`, single-headed otherwise.
queue::Head place_head(const net::CommunicationNet& net, const std::string& place) {
  for (const auto& a : net.arcs) {
    if (a.source == place && !a.remote) {
      if (auto h = net::head_of(a.category)) return *h;
    }
  }
  return queue::Head::Single;
}

const char* directive_word(Directive::Kind k) {
  switch (k) {
    case Directive::Kind::Put: return "put";
    case Directive::Kind::Wait: return "wait";
    case Directive::Kind::Get: return "get";
  }
  return "?";
}

}  // namespace

void apply_directives(net::CommunicationNet& net, const std::string& transition,
                      const Annotation& a) {
  if (!net.find_transition(transition)) {
    throw Error(ErrorKind::InvalidFragment, "no transition " + transition);
  }
  auto control_out = [&](const std::string& t) -> net::Arc& {
    for (auto& arc : net.arcs) {
      if (arc.category == net::ArcCategory::Out && arc.source == t &&
          arc.target != kMemoryPlace && !arc.remote) {
        const net::Place* p = net.find_place(arc.target);
        if (p && p->color == Color::Unit) return arc;
      }
    }
    throw Error(ErrorKind::InvalidFragment, "transition " + t + " has no control output");
  };

  std::string prev = transition;
  for (std::size_t k = 0; k < a.directives.size(); ++k) {
    const auto& d = a.directives[k];
    const net::Place* target = net.find_place(d.place);
    if (!target || d.place == kMemoryPlace) {
      throw Error(ErrorKind::UnknownPlace, "directive " + to_string(d) + " of " + a.label +
                                               " names unknown place '" + d.place + "'");
    }
    const net::PlaceKind target_kind = target->kind;
    std::string index = std::to_string(k + 1);
    std::string place = a.label + ":p" + index;
    std::string t = a.label + ":" + directive_word(d.kind) + index;
    if (net.find_place(place) || net.find_transition(place) || net.find_place(t) ||
        net.find_transition(t)) {
      throw Error(ErrorKind::DuplicateLabel, "elements of label " + a.label + " already exist");
    }
    net.places.push_back(unit_place(place));
    net.transitions.push_back({t, nullptr});

    net::Arc& ctl = control_out(prev);
    std::string next = ctl.target;
    ctl.target = place;
    net.arcs.push_back(input_arc(net::ArcCategory::In, place, t, simple_in(unit_pattern())));
    net.arcs.push_back(output_arc(t, next, simple_out(unit_pattern())));

    switch (d.kind) {
      case Directive::Kind::Put:
        net.arcs.push_back(input_arc(net::ArcCategory::In, std::string(kMemoryPlace), t,
                                     simple_in(memory_var())));
        net.arcs.push_back(output_arc(t, std::string(kMemoryPlace), simple_out(memory_var())));
        net.arcs.push_back(output_arc(t, d.place, simple_out(to_memory(d.value))));
        break;
      case Directive::Kind::Wait: {
        auto c = target_kind == net::PlaceKind::Queuing
                     ? net::queuing_category(place_head(net, d.place), true)
                     : net::ArcCategory::InRo;
        net.arcs.push_back(input_arc(c, d.place, t, simple_in(expr::var(std::string(expr::kWildcard)))));
        break;
      }
      case Directive::Kind::Get: {
        auto c = target_kind == net::PlaceKind::Queuing
                     ? net::queuing_category(place_head(net, d.place), false)
                     : net::ArcCategory::In;
        expr::InputArcExpr bulk;
        bulk.pattern = {expr::var(std::string(expr::kWildcard))};
        bulk.size = std::string("k");
        bulk.values = "vs";
        net.arcs.push_back(input_arc(c, d.place, t, std::move(bulk)));
        net.arcs.push_back(input_arc(net::ArcCategory::In, std::string(kMemoryPlace), t,
                                     simple_in(memory_var())));
        net.arcs.push_back(output_arc(
            t, std::string(kMemoryPlace),
            simple_out(expr::update(memory_var(), {d.variable}, {expr::var("vs")}))));
        break;
      }
    }
    prev = t;
  }
}

net::CommunicationNet lower_fragment(const Fragment& f, const net::CommunicationNet& cn) {
  net::CommunicationNet pn = to_program_net(f);
  net::CommunicationNet out = cn;
  for (const auto& p : pn.places) {
    if (out.find_place(p.name) || out.find_transition(p.name)) {
      throw Error(ErrorKind::InvalidFragment,
                  "program element " + p.name + " clashes with the communication net");
    }
    out.places.push_back(p);
  }
  for (const auto& t : pn.transitions) {
    if (out.find_place(t.name) || out.find_transition(t.name)) {
      throw Error(ErrorKind::InvalidFragment,
                  "program element " + t.name + " clashes with the communication net");
    }
    out.transitions.push_back(t);
  }
  out.arcs.insert(out.arcs.end(), pn.arcs.begin(), pn.arcs.end());
  for (std::size_t i = 0; i < f.edges.size(); ++i) {
    const auto& e = f.edges[i];
    if (e.annotation) apply_directives(out, edge_transition_name(e, i), *e.annotation);
  }
  return out;
}

namespace {

class FragmentParser : public detail::TextParser {
 public:
  using TextParser::TextParser;

  FragmentSource parse() {
    FragmentSource src;
    while (at_word("place")) src.net.places.push_back(place_decl());
    Value memory = Value::record({});
    if (accept_word("memory")) {
      auto e = expression();
      expect_symbol(";");
      memory = expr::eval(*e, {});
      if (!memory.is(Value::Kind::Record)) fail("initial memory must be a record before");
    }
    Block body;
    while (!at_end()) statement(body);
    src.fragment = compile(body, std::move(memory));
    check_fragment(src.fragment);
    return src;
  }

 private:
  net::Place place_decl() {
    expect_word("place");
    net::Place p;
    p.name = expect_ident();
    std::string kind = expect_ident();
    auto k = net::place_kind_from_string(kind);
    if (!k) fail("unknown place kind '" + kind + "' before", {"'queue'", "'multiset'"});
    p.kind = *k;
    while (!accept_symbol(";")) {
      if (accept_word("compound")) {
        p.compound = expect_ident();
      } else if (accept_word("key")) {
        expect_symbol("(");
        do {
          p.service_key.push_back(expect_ident());
        } while (accept_symbol(","));
        expect_symbol(")");
      } else if (accept_word("color")) {
        std::string c = expect_ident();
        auto color = color_from_string(c);
        if (!color) fail("unknown colour '" + c + "' before");
        p.color = *color;
      } else if (accept_word("init")) {
        expect_symbol("(");
        if (!at_symbol(")")) {
          for (const auto& e : expression_list()) p.initial.push_back(expr::eval(*e, {}));
        }
        expect_symbol(")");
      } else {
        fail("unexpected token", {"'compound'", "'key'", "'color'", "'init'", "';'"});
      }
    }
    return p;
  }

  Block block() {
    expect_symbol("{");
    Block b;
    while (!accept_symbol("}")) statement(b);
    return b;
  }

  std::optional<Annotation> annotation() {
    if (!accept_symbol("@")) return std::nullopt;
    Annotation a;
    a.label = expect_ident();
    expect_symbol("[");
    if (!at_symbol("]")) {
      do {
        a.directives.push_back(directive());
      } while (accept_symbol(","));
    }
    expect_symbol("]");
    return a;
  }

  Directive directive() {
    if (accept_word("put")) {
      expect_symbol("(");
      std::string place = expect_ident();
      expect_symbol("=");
      auto e = expression();
      expect_symbol(")");
      return Directive::put(std::move(place), std::move(e));
    }
    if (accept_word("wait")) {
      expect_symbol("(");
      std::string place = expect_ident();
      expect_symbol(")");
      return Directive::wait(std::move(place));
    }
    if (accept_word("get")) {
      expect_symbol("(");
      std::string place = expect_ident();
      expect_symbol("->");
      std::string var = expect_ident();
      expect_symbol(")");
      return Directive::get(std::move(place), std::move(var));
    }
    fail("unexpected token", {"'put'", "'wait'", "'get'"});
  }

  void statement(Block& out) {
    if (accept_word("if")) {
      expect_symbol("(");
      auto c = expression();
      expect_symbol(")");
      Block then = block();
      std::optional<Block> otherwise;
      if (accept_word("else")) {
        if (at_word("if")) {
          otherwise = Block{};
          statement(*otherwise);
        } else {
          otherwise = block();
        }
      }
      out.push_back(if_stmt(c, std::move(then), std::move(otherwise)));
      return;
    }
    if (accept_word("while")) {
      expect_symbol("(");
      auto c = expression();
      expect_symbol(")");
      out.push_back(while_stmt(c, block()));
      return;
    }
    if (accept_word("for")) {
      expect_symbol("(");
      std::string var = expect_ident();
      expect_symbol("=");
      auto init = expression();
      expect_symbol(";");
      auto cond = expression();
      expect_symbol(";");
      std::string step_var = expect_ident();
      expect_symbol("=");
      auto step = expression();
      expect_symbol(")");
      Block body = block();
      body.push_back(assign_stmt(step_var, step));
      out.push_back(assign_stmt(var, init));
      out.push_back(while_stmt(cond, std::move(body)));
      return;
    }
    if (accept_word("skip")) {
      auto a = annotation();
      expect_symbol(";");
      out.push_back(call_stmt("skip", std::move(a)));
      return;
    }
    std::string name = expect_ident();
    if (accept_symbol("=")) {
      auto e = expression();
      auto a = annotation();
      expect_symbol(";");
      out.push_back(assign_stmt(std::move(name), e, std::move(a)));
      return;
    }
    if (at_symbol("(")) {
      next();
      std::vector<expr::ExprPtr> args;
      if (!at_symbol(")")) args = expression_list();
      expect_symbol(")");
      auto a = annotation();
      expect_symbol(";");
      out.push_back(
          call_stmt(expr::to_string(*expr::call(name, std::move(args))), std::move(a)));
      return;
    }
    fail("unexpected token", {"'='", "'('"});
  }
};

}  // namespace

FragmentSource parse_fragment(std::string_view text) {
  FragmentParser p(text);
  return p.parse();
}

}  // namespace mpnet::program
