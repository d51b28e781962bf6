#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mpnet/net.hpp"
#include "mpnet/queue.hpp"

namespace mpnet::engine {

struct PlaceMarking {
  queue::QueueState queue;
  queue::Depository depository;

  bool empty() const { return queue.empty() && depository.empty(); }
  std::uint64_t size() const;
  friend bool operator==(const PlaceMarking&, const PlaceMarking&) = default;
};

/// Marking of a flat net. Only non-empty places are stored, sorted by index.
class SimState {
 public:
  const PlaceMarking* marking(std::size_t place) const;
  PlaceMarking& at(std::size_t place);  // inserts an empty marking when absent
  /// Drop empty places and recompute the hash. Call after mutating.
  void normalize();

  std::uint64_t hash() const { return hash_; }
  const std::vector<std::pair<std::uint32_t, PlaceMarking>>& entries() const { return entries_; }

  friend bool operator==(const SimState& a, const SimState& b) {
    return a.hash_ == b.hash_ && a.entries_ == b.entries_;
  }

 private:
  std::vector<std::pair<std::uint32_t, PlaceMarking>> entries_;
  std::uint64_t hash_ = 0;
};

/// Tokens taken (or read) from one place by one input arc.
struct Selection {
  std::size_t arc = 0;  // index into the transition's inputs
  std::size_t place = 0;
  std::vector<Value> tokens;
  bool read_only = false;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct Candidate {
  std::size_t transition = 0;
  Binding binding;
  std::vector<Selection> selections;
  std::uint64_t state_hash = 0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct FireResult {
  SimState state;  // scheduled
  std::vector<Value> events;
  std::vector<Candidate> enabled;  // candidates of `state`
};

struct SearchOptions {
  /// Partial bindings explored per transition before giving up.
  std::size_t budget = 1'000'000;
};

/// Precomputes per-transition search plans; reusable across states.
class Engine {
 public:
  explicit Engine(std::shared_ptr<const net::FlatNet> net, SearchOptions options = {});

  const net::FlatNet& net() const { return *net_; }

  /// Initial marking, scheduled.
  SimState initial_state() const;

  /// Run the scheduling phase on `s` (serving demanded tokens) and return
  /// the canonical, duplicate-free candidate list of the scheduled state.
  std::pair<SimState, std::vector<Candidate>> settle(const SimState& s) const;

  std::vector<Candidate> enabled(const SimState& s) const { return settle(s).second; }

  /// Fire `c` on the scheduled state `s`; the result is scheduled again.
  /// Throws StaleCandidate when `c` was computed for another state.
  FireResult fire(const SimState& s, const Candidate& c) const;

  /// All program-exit places marked (false when the net has none).
  bool is_terminal(const SimState& s) const;
  bool has_terminal_places() const { return !terminal_places_.empty(); }

  /// Queue/depository contents rendered for humans.
  std::string describe(const SimState& s) const;

 private:
  struct Plan;

  std::vector<Candidate> search(const SimState& s, bool augmented) const;
  void search_transition(const SimState& s, std::size_t t, bool augmented,
                         std::vector<Candidate>& out) const;

  std::shared_ptr<const net::FlatNet> net_;
  SearchOptions options_;
  std::shared_ptr<const std::vector<Plan>> plans_;
  std::vector<std::size_t> terminal_places_;
};

std::string to_string(const Candidate& c, const net::FlatNet& net);

// Randomised and interactive execution.

struct TraceStep {
  std::size_t step = 0;
  std::string transition;  // element id "area/name"
  std::size_t candidate = 0;  // index in the canonical candidate list
  Binding binding;
  std::uint64_t pre_hash = 0;
  std::uint64_t post_hash = 0;
  std::vector<Value> events;
};

struct Trace {
  std::vector<TraceStep> steps;
  SimState final_state;
};

/// Picks an index into a non-empty candidate list.
using Chooser = std::function<std::size_t(const std::vector<Candidate>&, const SimState&)>;

/// Uniform choice from a seeded mt19937_64.
Chooser seeded_chooser(std::uint64_t seed);

Trace run(const Engine& engine, const SimState& s0, const Chooser& chooser, std::size_t max_steps);

/// Re-fire recorded candidate indices; throws when a recorded hash differs.
Trace replay(const Engine& engine, const SimState& s0, const std::vector<TraceStep>& steps);

// Exhaustive exploration.

struct Limits {
  std::size_t max_states = 1'000'000;
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
};

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t transition = 0;
  std::size_t candidate = 0;
  std::vector<Value> events;
};

struct StateGraph {
  std::vector<SimState> states;  // states[0] is the initial state
  std::vector<GraphEdge> edges;  // grouped by `from`, in candidate order
  std::vector<std::size_t> terminals;
  std::vector<std::size_t> deadlocks;
  std::vector<std::size_t> depth;
  bool limit_exceeded = false;
  std::vector<std::size_t> unexpanded;  // states cut off by the limits

  std::vector<std::size_t> out_edges(std::size_t state) const;
};

StateGraph explore(const Engine& engine, const Limits& limits = {});

/// Maps an event to the value recorded in an ordering; nullopt drops it.
using EventProjection = std::function<std::optional<Value>(const Value&)>;

struct Orderings {
  std::set<std::vector<Value>> sequences;
  bool cyclic = false;  // back edges were ignored
};

/// Projected event sequences along every maximal path of `g`.
Orderings event_orderings(const StateGraph& g, const EventProjection& projection);

}  // namespace mpnet::engine
