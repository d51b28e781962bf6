#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpnet/value.hpp"

namespace mpnet::queue {

/// Service rule family of the arcs leaving a queuing place.
enum class Head : std::uint8_t { Single, Double };

const char* to_string(Head h);

/// Queue part of a queuing place, head first.
using QueueState = std::vector<Value>;

/// Accessible tokens of a place: value -> count (counts >= 1).
using Depository = std::map<Value, std::uint64_t>;

/// Record fields defining token identity for service. Empty: whole value.
using ServiceKey = std::span<const std::string>;

Value identity(const Value& v, ServiceKey key = {});

QueueState enqueue(QueueState q, const Value& v, Color color = Color::Any);

std::uint64_t token_count(const QueueState& q, const Value& v);

/// Number of depository tokens with the same identity as `v`.
std::uint64_t depository_count(const Depository& d, const Value& v, ServiceKey key = {});

bool can_serve_single(const QueueState& q, const Depository& d, const Value& v,
                      ServiceKey key = {});
bool can_serve_double(const QueueState& q, const Depository& d, const Value& v,
                      ServiceKey key = {});

/// Queue index that serving `v` would remove, if serviceable.
std::optional<std::size_t> service_index(const QueueState& q, const Depository& d, const Value& v,
                                         Head head, ServiceKey key = {});

/// Queue indices serviceable right now, in queue order.
std::vector<std::size_t> serviceable(const QueueState& q, const Depository& d, Head head,
                                     ServiceKey key = {});

/// Move one `v` from the queue to the depository. Throws NotServiceable.
std::pair<QueueState, Depository> serve(QueueState q, Depository d, const Value& v, Head head,
                                        ServiceKey key = {});

struct Demand {
  bool universal = false;
  std::vector<Value> values;

  static Demand all() { return {true, {}}; }
};

/// Scheduling phase: serve demanded tokens until nothing more is serviceable.
void schedule(QueueState& q, Depository& d, const Demand& demand, Head head, ServiceKey key = {});

}  // namespace mpnet::queue
