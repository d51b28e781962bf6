#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpnet/fragment.hpp"
#include "mpnet/net.hpp"

namespace mpnet::program {

inline constexpr std::string_view kMemoryPlace = "memory";
inline constexpr std::string_view kMemoryVar = "M";

/// Structured statements compiled into a Fragment state machine.
struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  enum class Kind { Assign, Call, If, While };

  Kind kind = Kind::Assign;
  std::vector<std::pair<std::string, expr::ExprPtr>> assignments;  // Assign
  std::string text;                                                // Call
  expr::ExprPtr condition;                                         // If, While
  std::shared_ptr<Block> body;                                     // If (then), While
  std::shared_ptr<Block> otherwise;                                // If (else); may be null
  std::optional<Annotation> annotation;                            // Assign, Call
};

Stmt assign_stmt(std::string var, expr::ExprPtr value, std::optional<Annotation> a = {});
Stmt call_stmt(std::string text, std::optional<Annotation> a = {});
Stmt if_stmt(expr::ExprPtr cond, Block then, std::optional<Block> otherwise = {});
Stmt while_stmt(expr::ExprPtr cond, Block body);

/// Nodes are named n0, n1, ... with n0 the entry.
Fragment compile(const Block& block, Value memory = Value::record({}));

/// Structural checks: node names unique, entry/exit present, every node
/// reachable, labels unique. Throws InvalidFragment / DuplicateLabel.
void check_fragment(const Fragment& f);

/// Program net: one unit place per node, one transition per edge, and the
/// memory place. Directives are not applied.
net::CommunicationNet to_program_net(const Fragment& f);

/// Splice the directive chain of `a` after `transition` in `net`. Places
/// named by directives are looked up in `net`.
void apply_directives(net::CommunicationNet& net, const std::string& transition,
                      const Annotation& a);

/// Communication net `cn` joined with the program net of `f`, directives applied.
net::CommunicationNet lower_fragment(const Fragment& f, const net::CommunicationNet& cn);

struct FragmentSource {
  Fragment fragment;
  net::CommunicationNet net;  // declared places
};

/// Annotated-fragment surface syntax: `place` declarations, then
/// assignments, `if`, `while`, `for` and bare calls, each simple statement
/// optionally followed by `@LABEL [put(P = e), wait(P), get(P -> x)]`.
FragmentSource parse_fragment(std::string_view text);

/// Rewrite program variables `x` to memory fields `M.x`.
expr::ExprPtr to_memory(const expr::ExprPtr& e);

}  // namespace mpnet::program
