#include "mpnet/mpi.hpp"

#include <algorithm>
#include <set>

#include "mpnet/program.hpp"
#include "text_parser.hpp"

namespace mpnet::mpi {

using expr::ExprPtr;

namespace {

struct CallSpec {
  Call::Kind kind;
  const char* name;
  std::vector<const char*> required;
  std::vector<const char*> optional;
  bool handle;  // `-> h` required
};

const std::vector<CallSpec>& call_specs() {
  static const std::vector<CallSpec> specs = {
      {Call::Kind::Send, "send", {"data", "dest", "tag"}, {}, false},
      {Call::Kind::Recv, "recv", {"src", "tag"}, {"out"}, false},
      {Call::Kind::Isend, "isend", {"data", "dest", "tag"}, {}, true},
      {Call::Kind::Irecv, "irecv", {"src", "tag"}, {"out"}, true},
      {Call::Kind::Wait, "wait", {}, {}, false},
      {Call::Kind::Waitall, "waitall", {}, {}, false},
  };
  return specs;
}

std::string at(SourcePos pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": ";
}

class ProgramParser : public detail::TextParser {
 public:
  using TextParser::TextParser;

  Program parse() {
    Program p;
    expect_word("program");
    p.name = expect_ident();
    expect_symbol("(");
    p.rank_var = expect_ident();
    if (accept_symbol(",")) p.size_var = expect_ident();
    expect_symbol(")");
    p.body = block();
    expect_end();
    return p;
  }

 private:
  Body block() {
    expect_symbol("{");
    Body b;
    while (!accept_symbol("}")) b.push_back(statement());
    return b;
  }

  Statement statement() {
    Statement s;
    s.pos = peek().pos;
    if (accept_word("if")) {
      s.kind = Statement::Kind::If;
      expect_symbol("(");
      s.condition = expression();
      expect_symbol(")");
      s.body = std::make_shared<Body>(block());
      if (accept_word("else")) {
        if (at_word("if")) {
          s.otherwise = std::make_shared<Body>(Body{statement()});
        } else {
          s.otherwise = std::make_shared<Body>(block());
        }
      }
      return s;
    }
    if (accept_word("for")) {
      s.kind = Statement::Kind::For;
      expect_symbol("(");
      s.var = expect_ident();
      expect_symbol("=");
      s.value = expression();
      expect_symbol(";");
      s.condition = expression();
      expect_symbol(";");
      s.step_var = expect_ident();
      expect_symbol("=");
      s.step = expression();
      expect_symbol(")");
      s.body = std::make_shared<Body>(block());
      return s;
    }
    std::string name = expect_ident();
    if (accept_symbol("=")) {
      s.kind = Statement::Kind::Assign;
      s.var = std::move(name);
      s.value = expression();
      expect_symbol(";");
      return s;
    }
    if (!at_symbol("(")) fail("unexpected token", {"'='", "'('"});
    s.kind = Statement::Kind::Call;
    s.call = call(name, s.pos);
    expect_symbol(";");
    return s;
  }

  Call call(const std::string& name, SourcePos pos) {
    const auto& specs = call_specs();
    auto spec = std::find_if(specs.begin(), specs.end(),
                             [&](const CallSpec& c) { return name == c.name; });
    if (spec == specs.end()) {
      throw Error(ErrorKind::UnknownCall, at(pos) + "unknown call '" + name + "'");
    }
    Call c;
    c.kind = spec->kind;
    c.pos = pos;
    expect_symbol("(");
    if (c.kind == Call::Kind::Wait || c.kind == Call::Kind::Waitall) {
      c.target = expression();
      expect_symbol(")");
      return c;
    }
    if (!at_symbol(")")) {
      do {
        SourcePos arg_pos = peek().pos;
        std::string arg = expect_ident();
        expect_symbol("=");
        auto known = [&](const std::vector<const char*>& names) {
          return std::any_of(names.begin(), names.end(),
                             [&](const char* n) { return arg == n; });
        };
        if (!known(spec->required) && !known(spec->optional)) {
          throw SyntaxError(arg_pos, "unknown argument '" + arg + "' of " + name);
        }
        if (c.args.count(arg) || (arg == "out" && !c.out.empty())) {
          throw SyntaxError(arg_pos, "argument '" + arg + "' given twice");
        }
        if (arg == "out") {
          c.out = expect_ident();
        } else {
          c.args[arg] = expression();
        }
      } while (accept_symbol(","));
    }
    expect_symbol(")");
    for (const char* r : spec->required) {
      if (!c.args.count(r)) {
        throw Error(ErrorKind::MissingArgument,
                    at(pos) + name + " is missing required argument '" + r + "'");
      }
    }
    if (spec->handle) {
      expect_symbol("->");
      c.handle = expect_ident();
      if (accept_symbol("[")) {
        expect_symbol("]");
        c.append = true;
      }
    }
    return c;
  }
};

ExprPtr lit_nat(std::uint64_t n) { return expr::lit(Value::nat(n)); }

}  // namespace

const char* to_string(Call::Kind k) {
  for (const auto& s : call_specs()) {
    if (s.kind == k) return s.name;
  }
  return "?";
}

std::string to_string(const Call& c) {
  std::string out = std::string(to_string(c.kind)) + "(";
  if (c.target) {
    out += expr::to_string(*c.target);
  } else {
    bool first = true;
    for (const auto& [k, v] : c.args) {
      out += (first ? "" : ", ") + k + " = " + expr::to_string(*v);
      first = false;
    }
    if (!c.out.empty()) out += std::string(first ? "" : ", ") + "out = " + c.out;
  }
  out += ")";
  if (!c.handle.empty()) out += " -> " + c.handle + (c.append ? "[]" : "");
  return out;
}

Program parse_program(std::string_view text) {
  ProgramParser p(text);
  return p.parse();
}

ExprPtr request_expr(std::uint64_t op, ExprPtr source, ExprPtr destination, ExprPtr tag,
                     ExprPtr data, ExprPtr req_id) {
  return expr::record({"op", "source", "destination", "tag", "data", "reqId"},
                      {lit_nat(op), std::move(source), std::move(destination), std::move(tag),
                       std::move(data), std::move(req_id)});
}

bool match(const Value& s, const Value& r) {
  auto f = [](const Value& v, const char* name) -> Value {
    const Value* x = v.field(name);
    return x ? *x : Value::unit();
  };
  return f(s, "destination") == f(r, "destination") && f(s, "tag") == f(r, "tag") &&
         loose_equal(f(r, "source"), f(s, "source"));
}

namespace {

net::Place request_place() {
  net::Place p;
  p.name = std::string(kRequestPlace);
  p.kind = net::PlaceKind::Queuing;
  p.color = Color::Record;
  p.compound = std::string(kRequestPlace);
  p.service_key = {"op", "source", "destination", "tag"};
  return p;
}

net::Place completion_place(std::string_view name) {
  net::Place p;
  p.name = std::string(name);
  p.color = Color::Record;
  return p;
}

ExprPtr dot(const std::string& var, const std::string& field) {
  return expr::field(expr::var(var), field);
}

}  // namespace

net::CommunicationNet broker_net() {
  net::CommunicationNet cn;
  cn.places.push_back(request_place());
  net::Transition t;
  t.name = std::string(kBrokerTransition);
  t.event = expr::record({"src", "dst", "tag", "rsrc", "sreq", "rreq"},
                         {dot("s", "source"), dot("r", "destination"), dot("s", "tag"),
                          dot("r", "source"), dot("s", "reqId"), dot("r", "reqId")});
  cn.transitions.push_back(t);

  auto eq = [](ExprPtr a, ExprPtr b) { return expr::binary(expr::BinOp::Eq, a, b); };
  net::Arc send;
  send.category = net::ArcCategory::QinDouble;
  send.source = std::string(kRequestPlace);
  send.target = t.name;
  send.input.conditions = {eq(dot("s", "op"), lit_nat(kOpSend))};
  send.input.pattern = {expr::var("s")};
  send.input.size = std::uint64_t{1};
  cn.arcs.push_back(send);

  net::Arc recv = send;
  recv.input.conditions = {eq(dot("r", "op"), lit_nat(kOpRecv)),
                           eq(dot("s", "destination"), dot("r", "destination")),
                           eq(dot("s", "tag"), dot("r", "tag")),
                           eq(dot("r", "source"), dot("s", "source"))};
  recv.input.pattern = {expr::var("r")};
  cn.arcs.push_back(recv);

  auto completion = [&](const char* req, std::string_view place, ExprPtr location) {
    net::Arc a;
    a.category = net::ArcCategory::Out;
    a.source = t.name;
    a.target = std::string(place);
    a.output.pattern = {expr::record({"reqId", "actualSource", "data"},
                                     {dot(req, "reqId"), dot("s", "source"), dot("s", "data")})};
    a.output.location = std::move(location);
    return a;
  };
  cn.arcs.push_back(completion("s", kCompletedSends, dot("s", "source")));
  cn.arcs.push_back(completion("r", kCompletedRecvs, dot("r", "destination")));
  return cn;
}

namespace {

enum class Direction { Send, Recv };

struct Analysis {
  bool has_isend = false;
  bool has_irecv = false;
  std::map<std::string, Direction> handles;
  std::set<std::string> arrays;
  std::map<std::string, std::vector<std::string>> outs;  // handle -> irecv out vars
};

void analyse(const Body& body, Analysis& a, std::set<std::string>& defined) {
  for (const auto& s : body) {
    switch (s.kind) {
      case Statement::Kind::Assign: defined.insert(s.var); break;
      case Statement::Kind::For:
        defined.insert(s.var);
        defined.insert(s.step_var);
        analyse(*s.body, a, defined);
        break;
      case Statement::Kind::If:
        analyse(*s.body, a, defined);
        if (s.otherwise) analyse(*s.otherwise, a, defined);
        break;
      case Statement::Kind::Call: {
        const auto& c = s.call;
        if (!c.out.empty()) defined.insert(c.out);
        if (c.handle.empty()) break;
        Direction d = c.kind == Call::Kind::Isend ? Direction::Send : Direction::Recv;
        (d == Direction::Send ? a.has_isend : a.has_irecv) = true;
        auto [it, fresh] = a.handles.emplace(c.handle, d);
        if (!fresh && it->second != d) {
          throw Error(ErrorKind::UnknownVariable,
                      at(c.pos) + "handle " + c.handle + " mixes send and receive requests");
        }
        if (c.append) a.arrays.insert(c.handle);
        defined.insert(c.handle);
        if (d == Direction::Recv && !c.out.empty()) {
          auto& o = a.outs[c.handle];
          if (std::find(o.begin(), o.end(), c.out) == o.end()) o.push_back(c.out);
        }
        break;
      }
    }
  }
}

void check_vars(const ExprPtr& e, const std::set<std::string>& defined, SourcePos pos) {
  if (!e) return;
  for (const auto& v : expr::free_vars(*e)) {
    if (!defined.count(v)) {
      throw Error(ErrorKind::UnknownVariable, at(pos) + "unknown variable '" + v + "'");
    }
  }
}

void check_body(const Body& body, const std::set<std::string>& defined) {
  for (const auto& s : body) {
    check_vars(s.value, defined, s.pos);
    check_vars(s.condition, defined, s.pos);
    check_vars(s.step, defined, s.pos);
    for (const auto& [k, v] : s.call.args) check_vars(v, defined, s.call.pos);
    check_vars(s.call.target, defined, s.call.pos);
    if (s.body) check_body(*s.body, defined);
    if (s.otherwise) check_body(*s.otherwise, defined);
  }
}

class RankLowering {
 public:
  RankLowering(const Program& p, const Analysis& a, std::uint64_t rank, std::uint64_t n)
      : p_(p), a_(a), rank_(rank), n_(n) {}

  program::Block lower(const Body& body) {
    program::Block out;
    for (const auto& s : body) statement(s, out);
    return out;
  }

 private:
  ExprPtr subst(const ExprPtr& e) const {
    return expr::substitute(e, [&](const std::string& name) -> ExprPtr {
      if (name == p_.rank_var) return lit_nat(rank_);
      if (name == p_.size_var) return lit_nat(n_);
      return nullptr;
    });
  }

  std::string label(Call::Kind k) { return std::string(to_string(k)) + std::to_string(++counter_[k]); }

  void statement(const Statement& s, program::Block& out) {
    switch (s.kind) {
      case Statement::Kind::Assign:
        out.push_back(program::assign_stmt(s.var, subst(s.value)));
        return;
      case Statement::Kind::If: {
        ExprPtr c = subst(s.condition);
        if (expr::free_vars(*c).empty()) {
          Value v = expr::eval(*c, {});
          if (!v.is(Value::Kind::Bool)) {
            throw Error(ErrorKind::TypeMismatch, at(s.pos) + "if condition is not boolean");
          }
          const Body* chosen = v.as_bool() ? s.body.get() : s.otherwise.get();
          if (chosen) {
            for (const auto& inner : *chosen) statement(inner, out);
          }
          return;
        }
        std::optional<program::Block> otherwise;
        if (s.otherwise) otherwise = lower(*s.otherwise);
        out.push_back(program::if_stmt(c, lower(*s.body), std::move(otherwise)));
        return;
      }
      case Statement::Kind::For: {
        out.push_back(program::assign_stmt(s.var, subst(s.value)));
        program::Block body = lower(*s.body);
        body.push_back(program::assign_stmt(s.step_var, subst(s.step)));
        out.push_back(program::while_stmt(subst(s.condition), std::move(body)));
        return;
      }
      case Statement::Kind::Call: call(s.call, out); return;
    }
  }

  // Assignment `_rq = _rq + 1` (plus the handle update) carrying the put of
  // a request whose id is the incremented counter.
  program::Stmt post(const Call& c, std::uint64_t op, std::vector<program::Directive> tail) {
    ExprPtr rq = expr::var("_rq");
    ExprPtr next = expr::binary(expr::BinOp::Add, rq, lit_nat(1));
    ExprPtr req;
    if (op == kOpSend) {
      req = request_expr(op, lit_nat(rank_), subst(c.args.at("dest")), subst(c.args.at("tag")),
                         subst(c.args.at("data")), rq);
    } else {
      req = request_expr(op, subst(c.args.at("src")), lit_nat(rank_), subst(c.args.at("tag")),
                         expr::lit(Value::unit()), rq);
    }
    program::Annotation a;
    a.label = label(c.kind);
    a.directives.push_back(program::Directive::put(std::string(kRequestPlace), req));
    for (auto& d : tail) a.directives.push_back(std::move(d));
    program::Stmt s = program::assign_stmt("_rq", next, std::move(a));
    if (!c.handle.empty()) {
      ExprPtr h = expr::var(c.handle);
      ExprPtr value = c.append ? expr::call("concat", {h, expr::tuple({next})}) : next;
      s.assignments.emplace_back(c.handle, value);
    }
    s.text = to_string(c);
    return s;
  }

  void wait_loop(Direction d, const ExprPtr& ids, program::Block& out) {
    std::string place(d == Direction::Send ? kCompletedSends : kCompletedRecvs);
    std::string pool = d == Direction::Send ? "_sp" : "_rp";
    program::Annotation a;
    a.label = label(Call::Kind::Wait) + "_loop";
    a.directives = {program::Directive::wait(place), program::Directive::get(place, "_g")};
    program::Block body{
        program::call_stmt("collect(" + place + ")", std::move(a)),
        program::assign_stmt(pool, expr::call("concat", {expr::var(pool), expr::var("_g")}))};
    ExprPtr covered = expr::call("covers", {expr::var(pool), ids});
    out.push_back(program::while_stmt(expr::not_(covered), std::move(body)));
  }

  void call(const Call& c, program::Block& out) {
    using K = Call::Kind;
    switch (c.kind) {
      case K::Send:
        if (!a_.has_isend) {
          out.push_back(post(c, kOpSend,
                             {program::Directive::wait(std::string(kCompletedSends)),
                              program::Directive::get(std::string(kCompletedSends), "_c")}));
        } else {
          out.push_back(post(c, kOpSend, {}));
          wait_loop(Direction::Send, expr::var("_rq"), out);
        }
        return;
      case K::Recv:
        if (!a_.has_irecv) {
          out.push_back(post(c, kOpRecv,
                             {program::Directive::wait(std::string(kCompletedRecvs)),
                              program::Directive::get(std::string(kCompletedRecvs), "_c")}));
          if (!c.out.empty()) {
            out.push_back(program::assign_stmt(
                c.out, expr::field(expr::field(expr::var("_c"), "0"), "data")));
          }
        } else {
          out.push_back(post(c, kOpRecv, {}));
          wait_loop(Direction::Recv, expr::var("_rq"), out);
          if (!c.out.empty()) {
            out.push_back(program::assign_stmt(
                c.out, expr::call("payloads", {expr::var("_rp"), expr::var("_rq")})));
          }
        }
        return;
      case K::Isend: out.push_back(post(c, kOpSend, {})); return;
      case K::Irecv: out.push_back(post(c, kOpRecv, {})); return;
      case K::Wait:
      case K::Waitall: {
        ExprPtr target = subst(c.target);
        std::optional<Direction> dir;
        for (const auto& v : expr::free_vars(*target)) {
          auto it = a_.handles.find(v);
          if (it == a_.handles.end()) continue;
          if (dir && *dir != it->second) {
            throw Error(ErrorKind::UnknownVariable,
                        at(c.pos) + "waiting on send and receive handles together");
          }
          dir = it->second;
        }
        if (!dir) {
          throw Error(ErrorKind::UnknownVariable,
                      at(c.pos) + to_string(c) + " does not name a request handle");
        }
        wait_loop(*dir, target, out);
        if (*dir == Direction::Recv) {
          for (const auto& v : expr::free_vars(*target)) {
            auto it = a_.outs.find(v);
            if (it == a_.outs.end()) continue;
            for (const auto& o : it->second) {
              out.push_back(program::assign_stmt(
                  o, expr::call("payloads", {expr::var("_rp"), expr::var(v)})));
            }
          }
        }
        return;
      }
    }
  }

  const Program& p_;
  const Analysis& a_;
  std::uint64_t rank_;
  std::uint64_t n_;
  std::map<Call::Kind, int> counter_;
};

}  // namespace

net::MPNet expand(const Program& p, std::uint64_t n) {
  if (n < 2) {
    throw Error(ErrorKind::RankCountTooSmall,
                "at least 2 ranks are needed, got " + std::to_string(n));
  }
  Analysis analysis;
  std::set<std::string> defined{p.rank_var, p.size_var};
  analyse(p.body, analysis, defined);
  check_body(p.body, defined);

  std::vector<Value::Field> memory{{"_rq", Value::nat(0)}};
  if (analysis.has_isend) memory.emplace_back("_sp", Value::tuple({}));
  if (analysis.has_irecv) memory.emplace_back("_rp", Value::tuple({}));
  for (const auto& h : analysis.arrays) memory.emplace_back(h, Value::tuple({}));
  Value initial_memory = Value::record(memory);

  net::MPNet net;
  for (std::uint64_t r = 0; r <= n; ++r) net.address_space.push_back(r);
  for (std::uint64_t r = 0; r < n; ++r) {
    net::Area area;
    area.address = r;
    area.name = "rank" + std::to_string(r);
    RankLowering lowering(p, analysis, r, n);
    area.fragment = program::compile(lowering.lower(p.body), initial_memory);
    area.net.places = {request_place(), completion_place(kCompletedSends),
                       completion_place(kCompletedRecvs)};
    net.areas.push_back(std::move(area));
  }
  net::Area broker;
  broker.address = n;
  broker.name = "broker";
  broker.net = broker_net();
  net.areas.push_back(std::move(broker));
  return net;
}

}  // namespace mpnet::mpi
