#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpnet/expr.hpp"

namespace mpnet::program {

struct Directive {
  enum class Kind { Put, Wait, Get };

  Kind kind = Kind::Wait;
  std::string place;
  expr::ExprPtr value;   // Put
  std::string variable;  // Get

  static Directive put(std::string place, expr::ExprPtr value);
  static Directive wait(std::string place);
  static Directive get(std::string place, std::string variable);
};

std::string to_string(const Directive& d);

struct Annotation {
  std::string label;
  std::vector<Directive> directives;
};

/// Edge statement of a program state machine.
struct Statement {
  enum class Kind { NoOp, Assign, Branch, Call };

  Kind kind = Kind::NoOp;
  /// Assign: simultaneous updates, every right-hand side reads the old memory.
  std::vector<std::pair<std::string, expr::ExprPtr>> assignments;
  expr::ExprPtr condition;  // Branch
  std::string text;         // Call: source text shown in labels

  static Statement noop();
  static Statement assign(std::string var, expr::ExprPtr value);
  static Statement branch(expr::ExprPtr condition);
  static Statement call(std::string text);
};

std::string to_string(const Statement& s);

struct Edge {
  std::string from;
  std::string to;
  Statement statement;
  std::optional<Annotation> annotation;
};

/// Sequential program as a state machine over program points. Variables are
/// plain names; lowering rewrites them to fields of the memory record.
struct Fragment {
  std::vector<std::string> nodes;
  std::string entry;
  std::string exit;
  std::vector<Edge> edges;
  Value memory = Value::record({});  // initial memory record
};

}  // namespace mpnet::program
