#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "mpnet/value.hpp"

namespace mpnet::expr {

enum class BinOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

const char* to_string(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Arc-inscription expression. Nodes are immutable and shared.
struct Expr {
  enum class Kind { Literal, Var, Binary, Not, Tuple, Record, Field, Update, If, Call };

  Kind kind = Kind::Literal;
  Value value;                     // Literal
  std::string name;                // Var, Field (field name), Call (function)
  BinOp op = BinOp::Add;           // Binary
  std::vector<ExprPtr> args;       // operands / elements / fields / call arguments
  std::vector<std::string> names;  // Record and Update field names, parallel to args
};

bool operator==(const Expr& a, const Expr& b);

ExprPtr lit(Value v);
ExprPtr var(std::string name);
ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr not_(ExprPtr e);
ExprPtr tuple(std::vector<ExprPtr> elements);
ExprPtr record(std::vector<std::string> names, std::vector<ExprPtr> values);
ExprPtr field(ExprPtr base, std::string name);
ExprPtr update(ExprPtr base, std::vector<std::string> names, std::vector<ExprPtr> values);
ExprPtr if_(ExprPtr cond, ExprPtr then, ExprPtr otherwise);
ExprPtr call(std::string function, std::vector<ExprPtr> args);

/// Name of the wildcard variable. It matches anything and never binds.
inline constexpr std::string_view kWildcard = "_";

bool is_var(const Expr& e);
bool is_wildcard(const Expr& e);

/// Canonical text; parse(to_string(e)) reproduces e.
std::string to_string(const Expr& e);

std::set<std::string> free_vars(const Expr& e);

/// Replace every variable occurrence for which `fn` returns a value.
ExprPtr substitute(const ExprPtr& e, const std::function<ExprPtr(const std::string&)>& fn);

/// Binding key under which the engine records the address chosen for
/// `pick_address(lo, hi)`.
std::string pick_key(std::uint64_t lo, std::uint64_t hi);

/// Collect every `pick_address` call occurring in `e`.
void collect_picks(const ExprPtr& e, std::vector<ExprPtr>& out);

Value eval(const Expr& e, const Binding& b);

/// All-conditions-true check followed by element-wise pattern evaluation;
/// returns an empty sequence as soon as one condition is false.
std::vector<Value> eval_arc(const std::vector<ExprPtr>& conditions,
                            const std::vector<ExprPtr>& pattern, const Binding& b);

/// `[conditions] (pattern, size, values)`, derived forms expanded.
struct InputArcExpr {
  std::vector<ExprPtr> conditions;
  std::vector<ExprPtr> pattern;
  std::variant<std::uint64_t, std::string> size;
  std::optional<std::string> values;

  bool bulk() const { return std::holds_alternative<std::string>(size); }
};

/// `[conditions] pattern @ location`.
struct OutputArcExpr {
  std::vector<ExprPtr> conditions;
  std::vector<ExprPtr> pattern;
  ExprPtr location;  // may be null: default address
};

bool operator==(const InputArcExpr& a, const InputArcExpr& b);
bool operator==(const OutputArcExpr& a, const OutputArcExpr& b);

std::string to_string(const InputArcExpr& a);
std::string to_string(const OutputArcExpr& a);

std::set<std::string> free_vars(const InputArcExpr& a);
std::set<std::string> free_vars(const OutputArcExpr& a);

}  // namespace mpnet::expr
