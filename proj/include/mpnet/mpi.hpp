#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mpnet/error.hpp"
#include "mpnet/expr.hpp"
#include "mpnet/net.hpp"

namespace mpnet::mpi {

inline constexpr std::string_view kRequestPlace = "ASR";
inline constexpr std::string_view kCompletedSends = "CSR";
inline constexpr std::string_view kCompletedRecvs = "CRR";
inline constexpr std::string_view kBrokerTransition = "match";

inline constexpr std::uint64_t kOpSend = 0;
inline constexpr std::uint64_t kOpRecv = 1;

struct Call {
  enum class Kind { Send, Recv, Isend, Irecv, Wait, Waitall };

  Kind kind = Kind::Send;
  std::map<std::string, expr::ExprPtr> args;  // data, dest, src, tag
  std::string out;                            // recv / irecv
  std::string handle;                         // isend / irecv `-> h`
  bool append = false;                        // `-> h[]`
  expr::ExprPtr target;                       // wait / waitall argument
  SourcePos pos;
};

const char* to_string(Call::Kind k);

struct Statement;
using Body = std::vector<Statement>;

struct Statement {
  enum class Kind { Assign, If, For, Call };

  Kind kind = Kind::Assign;
  std::string var;            // Assign, For (loop variable)
  expr::ExprPtr value;        // Assign, For (initial value)
  expr::ExprPtr condition;    // If, For
  std::string step_var;       // For
  expr::ExprPtr step;         // For
  std::shared_ptr<Body> body;       // If (then), For
  std::shared_ptr<Body> otherwise;  // If (else); may be null
  Call call;                  // Call
  SourcePos pos;
};

struct Program {
  std::string name;
  std::string rank_var = "rank";
  std::string size_var = "size";
  Body body;
};

/// `program NAME(rank[, size]) { ... }`. Throws SyntaxError, or Error with
/// UnknownCall / MissingArgument carrying the source position.
Program parse_program(std::string_view text);

/// Rendered call, e.g. `recv(src = ANY, tag = 0, out = x)`.
std::string to_string(const Call& c);

/// Request record put into ASR.
expr::ExprPtr request_expr(std::uint64_t op, expr::ExprPtr source, expr::ExprPtr destination,
                           expr::ExprPtr tag, expr::ExprPtr data, expr::ExprPtr req_id);

/// Envelope match of a send request `s` and a receive request `r`.
bool match(const Value& s, const Value& r);

/// The message broker area's net: one `match` transition over ASR.
net::CommunicationNet broker_net();

/// One area per rank 0..n-1 plus the broker at address n.
net::MPNet expand(const Program& p, std::uint64_t n);

}  // namespace mpnet::mpi
