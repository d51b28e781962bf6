#include "mpnet/expr.hpp"

#include <algorithm>

#include "mpnet/error.hpp"

namespace mpnet::expr {

namespace {

// Printing precedence; higher binds tighter.
constexpr int kPrecIf = 0;
constexpr int kPrecOr = 1;
constexpr int kPrecAnd = 2;
constexpr int kPrecCmp = 3;
constexpr int kPrecAdd = 4;
constexpr int kPrecMul = 5;
constexpr int kPrecUnary = 6;
constexpr int kPrecAtom = 7;

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return kPrecOr;
    case BinOp::And: return kPrecAnd;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return kPrecCmp;
    case BinOp::Add:
    case BinOp::Sub: return kPrecAdd;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return kPrecMul;
  }
  return kPrecAtom;
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary: return precedence(e.op);
    case Expr::Kind::Not: return kPrecUnary;
    case Expr::Kind::If: return kPrecIf;
    default: return kPrecAtom;
  }
}

std::string print(const Expr& e, int min_prec);

std::string print_list(const std::vector<ExprPtr>& es, std::size_t from = 0) {
  std::string out;
  for (std::size_t i = from; i < es.size(); ++i) {
    if (i > from) out += ", ";
    out += print(*es[i], kPrecIf);
  }
  return out;
}

// Record constructor: names[i] <-> args[i]. Update: names[i] <-> args[i + 1].
std::string print_fields(const std::vector<std::string>& names, const std::vector<ExprPtr>& es,
                         std::size_t offset) {
  std::string out = "{";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i] + " = " + print(*es[i + offset], kPrecIf);
  }
  return out + "}";
}

std::string print(const Expr& e, int min_prec) {
  std::string out;
  switch (e.kind) {
    case Expr::Kind::Literal:
      out = to_string(e.value);
      break;
    case Expr::Kind::Var:
      out = e.name;
      break;
    case Expr::Kind::Binary: {
      int p = precedence(e.op);
      bool cmp = p == kPrecCmp;
      out = print(*e.args[0], cmp ? p + 1 : p) + " " + to_string(e.op) + " " +
            print(*e.args[1], p + 1);
      break;
    }
    case Expr::Kind::Not:
      out = "not " + print(*e.args[0], kPrecUnary);
      break;
    case Expr::Kind::Tuple:
      out = "(" + print_list(e.args) + (e.args.size() == 1 ? ",)" : ")");
      break;
    case Expr::Kind::Record:
      out = print_fields(e.names, e.args, 0);
      break;
    case Expr::Kind::Field:
      out = print(*e.args[0], kPrecAtom) + "." + e.name;
      break;
    case Expr::Kind::Update:
      out = print(*e.args[0], kPrecAtom) + print_fields(e.names, e.args, 1);
      break;
    case Expr::Kind::If:
      out = "if " + print(*e.args[0], kPrecIf) + " then " + print(*e.args[1], kPrecIf) +
            " else " + print(*e.args[2], kPrecIf);
      break;
    case Expr::Kind::Call:
      out = e.name + "(" + print_list(e.args) + ")";
      break;
  }
  if (precedence(e) < min_prec) return "(" + out + ")";
  return out;
}

ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::Var) {
    if (e.name != kWildcard) out.insert(e.name);
    return;
  }
  for (const auto& a : e.args) collect_vars(*a, out);
}

[[noreturn]] void type_error(const std::string& what) { throw Error(ErrorKind::TypeMismatch, what); }

void reject_opaque(const Value& v, const char* op) {
  if (v.is(Value::Kind::Opaque)) {
    throw Error(ErrorKind::OpaqueInspection,
                std::string("operator '") + op + "' applied to an opaque value");
  }
}

std::uint64_t nat_operand(const Value& v, BinOp op) {
  reject_opaque(v, to_string(op));
  if (!v.is(Value::Kind::Nat)) {
    type_error(std::string("operator '") + to_string(op) + "' expects nat operands, got " +
               to_string(v.kind()));
  }
  return v.as_nat();
}

bool bool_operand(const Value& v, const char* op) {
  reject_opaque(v, op);
  if (!v.is(Value::Kind::Bool)) {
    type_error(std::string("operator '") + op + "' expects bool operands, got " +
               to_string(v.kind()));
  }
  return v.as_bool();
}

std::span<const Value> tuple_arg(const Value& v, const std::string& fn) {
  reject_opaque(v, fn.c_str());
  if (!v.is(Value::Kind::Tuple)) type_error(fn + " expects a tuple, got " + to_string(v.kind()));
  return v.elements();
}

std::vector<std::uint64_t> id_list(const Value& v, const std::string& fn) {
  std::vector<std::uint64_t> ids;
  if (v.is(Value::Kind::Nat)) {
    ids.push_back(v.as_nat());
    return ids;
  }
  for (const auto& e : tuple_arg(v, fn)) {
    if (!e.is(Value::Kind::Nat)) type_error(fn + " expects request ids");
    ids.push_back(e.as_nat());
  }
  return ids;
}

const Value* find_completion(std::span<const Value> pool, std::uint64_t id) {
  for (const auto& c : pool) {
    const Value* r = c.field("reqId");
    if (r && r->is(Value::Kind::Nat) && r->as_nat() == id) return &c;
  }
  return nullptr;
}

Value eval_call(const Expr& e, const Binding& b) {
  std::vector<Value> args;
  args.reserve(e.args.size());
  for (const auto& a : e.args) args.push_back(eval(*a, b));
  auto arity = [&](std::size_t n) {
    if (args.size() != n) {
      type_error(e.name + " expects " + std::to_string(n) + " argument(s), got " +
                 std::to_string(args.size()));
    }
  };

  if (e.name == "pick_address") {
    arity(2);
    std::uint64_t lo = nat_operand(args[0], BinOp::Le);
    std::uint64_t hi = nat_operand(args[1], BinOp::Le);
    auto it = b.find(pick_key(lo, hi));
    if (it == b.end()) {
      throw Error(ErrorKind::UnresolvedChoice, "no address chosen for " + pick_key(lo, hi));
    }
    return it->second;
  }
  if (e.name == "len") {
    arity(1);
    return Value::nat(tuple_arg(args[0], e.name).size());
  }
  if (e.name == "concat") {
    arity(2);
    auto x = tuple_arg(args[0], e.name);
    auto y = tuple_arg(args[1], e.name);
    std::vector<Value> out(x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    return Value::tuple(std::move(out));
  }
  if (e.name == "covers") {
    arity(2);
    auto pool = tuple_arg(args[0], e.name);
    for (auto id : id_list(args[1], e.name)) {
      if (!find_completion(pool, id)) return Value::boolean(false);
    }
    return Value::boolean(true);
  }
  if (e.name == "payloads") {
    arity(2);
    auto pool = tuple_arg(args[0], e.name);
    std::vector<Value> out;
    for (auto id : id_list(args[1], e.name)) {
      const Value* c = find_completion(pool, id);
      if (!c) type_error("payloads: no completion for request " + std::to_string(id));
      const Value* data = c->field("data");
      out.push_back(data ? *data : Value::unit());
    }
    if (args[1].is(Value::Kind::Nat)) return out.front();
    return Value::tuple(std::move(out));
  }
  throw Error(ErrorKind::UnknownFunction, "unknown function '" + e.name + "'");
}

Value eval_binary(const Expr& e, const Binding& b) {
  if (e.op == BinOp::And || e.op == BinOp::Or) {
    bool lhs = bool_operand(eval(*e.args[0], b), to_string(e.op));
    if (e.op == BinOp::And && !lhs) return Value::boolean(false);
    if (e.op == BinOp::Or && lhs) return Value::boolean(true);
    return Value::boolean(bool_operand(eval(*e.args[1], b), to_string(e.op)));
  }
  Value x = eval(*e.args[0], b);
  Value y = eval(*e.args[1], b);
  switch (e.op) {
    case BinOp::Eq: return Value::boolean(loose_equal(x, y));
    case BinOp::Ne: return Value::boolean(!loose_equal(x, y));
    default: break;
  }
  std::uint64_t l = nat_operand(x, e.op);
  std::uint64_t r = nat_operand(y, e.op);
  switch (e.op) {
    case BinOp::Add: return Value::nat(l + r);
    case BinOp::Sub: return Value::nat(l > r ? l - r : 0);
    case BinOp::Mul: return Value::nat(l * r);
    case BinOp::Div:
      if (r == 0) throw Error(ErrorKind::DivisionByZero, "div by zero");
      return Value::nat(l / r);
    case BinOp::Mod:
      if (r == 0) throw Error(ErrorKind::DivisionByZero, "mod by zero");
      return Value::nat(l % r);
    case BinOp::Lt: return Value::boolean(l < r);
    case BinOp::Le: return Value::boolean(l <= r);
    case BinOp::Gt: return Value::boolean(l > r);
    case BinOp::Ge: return Value::boolean(l >= r);
    default: break;
  }
  type_error("bad binary operator");
}

bool list_equal(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(*a[i] == *b[i])) return false;
  }
  return true;
}

std::string print_conditions(const std::vector<ExprPtr>& cs) {
  if (cs.empty()) return "";
  return "[" + print_list(cs) + "] ";
}

}  // namespace

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "div";
    case BinOp::Mod: return "mod";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
  }
  return "?";
}

bool operator==(const Expr& a, const Expr& b) {
  if (&a == &b) return true;
  return a.kind == b.kind && a.value == b.value && a.name == b.name &&
         (a.kind != Expr::Kind::Binary || a.op == b.op) && a.names == b.names &&
         list_equal(a.args, b.args);
}

ExprPtr lit(Value v) {
  Expr e;
  e.kind = Expr::Kind::Literal;
  e.value = std::move(v);
  return make(std::move(e));
}

ExprPtr var(std::string name) {
  Expr e;
  e.kind = Expr::Kind::Var;
  e.name = std::move(name);
  return make(std::move(e));
}

ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = Expr::Kind::Binary;
  e.op = op;
  e.args = {std::move(lhs), std::move(rhs)};
  return make(std::move(e));
}

ExprPtr not_(ExprPtr operand) {
  Expr e;
  e.kind = Expr::Kind::Not;
  e.args = {std::move(operand)};
  return make(std::move(e));
}

ExprPtr tuple(std::vector<ExprPtr> elements) {
  Expr e;
  e.kind = Expr::Kind::Tuple;
  e.args = std::move(elements);
  return make(std::move(e));
}

ExprPtr record(std::vector<std::string> names, std::vector<ExprPtr> values) {
  Expr e;
  e.kind = Expr::Kind::Record;
  e.names = std::move(names);
  e.args = std::move(values);
  return make(std::move(e));
}

ExprPtr field(ExprPtr base, std::string name) {
  Expr e;
  e.kind = Expr::Kind::Field;
  e.name = std::move(name);
  e.args = {std::move(base)};
  return make(std::move(e));
}

ExprPtr update(ExprPtr base, std::vector<std::string> names, std::vector<ExprPtr> values) {
  Expr e;
  e.kind = Expr::Kind::Update;
  e.names = std::move(names);
  e.args.push_back(std::move(base));
  for (auto& v : values) e.args.push_back(std::move(v));
  return make(std::move(e));
}

ExprPtr if_(ExprPtr cond, ExprPtr then, ExprPtr otherwise) {
  Expr e;
  e.kind = Expr::Kind::If;
  e.args = {std::move(cond), std::move(then), std::move(otherwise)};
  return make(std::move(e));
}

ExprPtr call(std::string function, std::vector<ExprPtr> args) {
  Expr e;
  e.kind = Expr::Kind::Call;
  e.name = std::move(function);
  e.args = std::move(args);
  return make(std::move(e));
}

bool is_var(const Expr& e) { return e.kind == Expr::Kind::Var; }

bool is_wildcard(const Expr& e) { return e.kind == Expr::Kind::Var && e.name == kWildcard; }

std::string to_string(const Expr& e) { return print(e, kPrecIf); }

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

ExprPtr substitute(const ExprPtr& e, const std::function<ExprPtr(const std::string&)>& fn) {
  if (e->kind == Expr::Kind::Var) {
    if (auto r = fn(e->name)) return r;
    return e;
  }
  if (e->args.empty()) return e;
  Expr copy = *e;
  bool changed = false;
  for (auto& a : copy.args) {
    auto s = substitute(a, fn);
    changed = changed || s != a;
    a = std::move(s);
  }
  return changed ? make(std::move(copy)) : e;
}

std::string pick_key(std::uint64_t lo, std::uint64_t hi) {
  return "pick_address(" + std::to_string(lo) + ", " + std::to_string(hi) + ")";
}

void collect_picks(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (e->kind == Expr::Kind::Call && e->name == "pick_address") out.push_back(e);
  for (const auto& a : e->args) collect_picks(a, out);
}

Value eval(const Expr& e, const Binding& b) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      return e.value;
    case Expr::Kind::Var: {
      auto it = b.find(e.name);
      if (it == b.end()) throw Error(ErrorKind::UnboundVariable, e.name);
      return it->second;
    }
    case Expr::Kind::Binary:
      return eval_binary(e, b);
    case Expr::Kind::Not:
      return Value::boolean(!bool_operand(eval(*e.args[0], b), "not"));
    case Expr::Kind::Tuple: {
      std::vector<Value> es;
      es.reserve(e.args.size());
      for (const auto& a : e.args) es.push_back(eval(*a, b));
      return Value::tuple(std::move(es));
    }
    case Expr::Kind::Record: {
      std::vector<Value::Field> fs;
      fs.reserve(e.args.size());
      for (std::size_t i = 0; i < e.args.size(); ++i) fs.emplace_back(e.names[i], eval(*e.args[i], b));
      return Value::record(std::move(fs));
    }
    case Expr::Kind::Field: {
      Value base = eval(*e.args[0], b);
      if (base.is(Value::Kind::Opaque)) {
        throw Error(ErrorKind::OpaqueInspection, "field '" + e.name + "' of an opaque value");
      }
      if (base.is(Value::Kind::Tuple) && !e.name.empty() &&
          std::all_of(e.name.begin(), e.name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        std::size_t idx = std::stoull(e.name);
        auto es = base.elements();
        if (idx >= es.size()) type_error("tuple index " + e.name + " out of range");
        return es[idx];
      }
      const Value* f = base.field(e.name);
      if (!f) type_error("no field '" + e.name + "' in " + to_string(base));
      return *f;
    }
    case Expr::Kind::Update: {
      Value base = eval(*e.args[0], b);
      if (base.is(Value::Kind::Opaque)) throw Error(ErrorKind::OpaqueInspection, "update of an opaque value");
      if (!base.is(Value::Kind::Record)) type_error("record update on " + std::string(to_string(base.kind())));
      for (std::size_t i = 0; i < e.names.size(); ++i) {
        base = base.with_field(e.names[i], eval(*e.args[i + 1], b));
      }
      return base;
    }
    case Expr::Kind::If: {
      bool c = bool_operand(eval(*e.args[0], b), "if");
      return eval(*e.args[c ? 1 : 2], b);
    }
    case Expr::Kind::Call:
      return eval_call(e, b);
  }
  type_error("bad expression");
}

std::vector<Value> eval_arc(const std::vector<ExprPtr>& conditions,
                            const std::vector<ExprPtr>& pattern, const Binding& b) {
  bool all_true = true;
  for (const auto& c : conditions) {
    Value v = eval(*c, b);
    if (!v.is(Value::Kind::Bool)) {
      throw Error(ErrorKind::ConditionNotBoolean, to_string(*c) + " evaluated to " + to_string(v));
    }
    all_true = all_true && v.as_bool();
  }
  if (!all_true) return {};
  std::vector<Value> out;
  out.reserve(pattern.size());
  for (const auto& p : pattern) out.push_back(eval(*p, b));
  return out;
}

bool operator==(const InputArcExpr& a, const InputArcExpr& b) {
  return list_equal(a.conditions, b.conditions) && list_equal(a.pattern, b.pattern) &&
         a.size == b.size && a.values == b.values;
}

bool operator==(const OutputArcExpr& a, const OutputArcExpr& b) {
  if (!list_equal(a.conditions, b.conditions) || !list_equal(a.pattern, b.pattern)) return false;
  if (!a.location || !b.location) return !a.location && !b.location;
  return *a.location == *b.location;
}

std::string to_string(const InputArcExpr& a) {
  std::string pat = a.pattern.size() == 1 ? print(*a.pattern[0], kPrecIf)
                                          : "[" + print_list(a.pattern) + "]";
  std::string out = print_conditions(a.conditions) + "(" + pat;
  bool derived = !a.bulk() && std::get<std::uint64_t>(a.size) == a.pattern.size() && !a.values;
  if (!derived) {
    out += ", ";
    out += a.bulk() ? std::get<std::string>(a.size) : std::to_string(std::get<std::uint64_t>(a.size));
    if (a.values) out += ", " + *a.values;
  }
  return out + ")";
}

std::string to_string(const OutputArcExpr& a) {
  std::string out = print_conditions(a.conditions) + print_list(a.pattern);
  if (a.location) out += " @ " + print(*a.location, kPrecOr);
  return out;
}

std::set<std::string> free_vars(const InputArcExpr& a) {
  std::set<std::string> out;
  for (const auto& c : a.conditions) collect_vars(*c, out);
  for (const auto& p : a.pattern) collect_vars(*p, out);
  if (a.bulk()) out.insert(std::get<std::string>(a.size));
  if (a.values) out.insert(*a.values);
  return out;
}

std::set<std::string> free_vars(const OutputArcExpr& a) {
  std::set<std::string> out;
  for (const auto& c : a.conditions) collect_vars(*c, out);
  for (const auto& p : a.pattern) collect_vars(*p, out);
  if (a.location) collect_vars(*a.location, out);
  return out;
}

}  // namespace mpnet::expr
