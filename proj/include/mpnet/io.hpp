#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mpnet/engine.hpp"
#include "mpnet/net.hpp"

namespace mpnet::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Nat -> number, Bool -> bool, Unit -> null, Tuple -> array,
/// Record -> object, Any -> "ANY", Opaque -> {"opaque": base64, "origin": s}.
json to_json(const Value& v);
Value value_from_json(const json& j);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

json to_json(const net::MPNet& net);
/// Throws Error(Format) on malformed documents and SyntaxError on bad inscriptions.
net::MPNet net_from_json(const json& j);

std::string save_net(const net::MPNet& net);
net::MPNet load_net(std::string_view text);

std::string hash_hex(std::uint64_t h);
std::uint64_t hash_from_hex(std::string_view s);

json to_json(const engine::SimState& s, const net::FlatNet& net);
json to_json(const engine::Candidate& c, const net::FlatNet& net);
json to_json(const engine::TraceStep& step);
engine::TraceStep trace_step_from_json(const json& j);

/// One JSON object per line.
std::string trace_to_jsonl(const engine::Trace& trace);
std::vector<engine::TraceStep> trace_from_jsonl(std::string_view text);

struct DotOptions {
  std::optional<std::uint64_t> area;         // restrict to one area
  const engine::SimState* marking = nullptr;  // overlay (flat nets only)
};

/// Per-area views with program nets attached and location arcs resolved to
/// their holders; compound places keep their badge.
std::string to_dot(const net::MPNet& net, const DotOptions& options = {});
std::string to_dot(const net::FlatNet& net, const DotOptions& options = {});

}  // namespace mpnet::io
