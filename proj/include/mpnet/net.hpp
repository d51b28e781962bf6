#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpnet/expr.hpp"
#include "mpnet/fragment.hpp"
#include "mpnet/queue.hpp"
#include "mpnet/value.hpp"

namespace mpnet::net {

enum class PlaceKind : std::uint8_t { Multiset, Queuing };

enum class ArcCategory : std::uint8_t {
  In,
  InRo,
  QinSingle,
  QinDouble,
  QinSingleRo,
  QinDoubleRo,
  Out,
  ControlFlow,
};

const char* to_string(PlaceKind k);
std::optional<PlaceKind> place_kind_from_string(std::string_view s);
const char* to_string(ArcCategory c);
std::optional<ArcCategory> category_from_string(std::string_view s);

bool is_input(ArcCategory c);
bool is_queuing(ArcCategory c);
bool is_read_only(ArcCategory c);
std::optional<queue::Head> head_of(ArcCategory c);
ArcCategory queuing_category(queue::Head head, bool read_only);

struct Place {
  std::string name;
  PlaceKind kind = PlaceKind::Multiset;
  Color color = Color::Any;
  std::optional<std::string> compound;
  std::vector<Value> initial;  // queue order for queuing places
  std::vector<std::string> service_key;
  bool terminal = false;  // marked when the owning program has finished
  std::vector<std::uint64_t> views;  // areas whose compound views were merged here
};

struct Transition {
  std::string name;
  expr::ExprPtr event;  // observable event emitted on firing; may be null
};

/// Arc within one area. Input arcs run place -> transition, output arcs
/// transition -> place, control-flow arcs between any two elements.
struct Arc {
  ArcCategory category = ArcCategory::In;
  std::string source;
  std::string target;
  /// Area holding the place endpoint when it is not the arc's own area.
  std::optional<std::uint64_t> remote;
  expr::InputArcExpr input;
  expr::OutputArcExpr output;
  /// Set on arcs produced by location lowering: the original location and a
  /// per-area group number shared by the arcs split from one original arc.
  expr::ExprPtr lowered_location;
  int location_group = -1;

  const std::string& place() const;
  const std::string& transition() const;
};

struct CommunicationNet {
  std::vector<Place> places;
  std::vector<Transition> transitions;
  std::vector<Arc> arcs;

  const Place* find_place(std::string_view name) const;
  Place* find_place(std::string_view name);
  const Transition* find_transition(std::string_view name) const;
};

struct Area {
  std::uint64_t address = 0;
  std::string name;
  std::optional<program::Fragment> fragment;
  CommunicationNet net;
};

struct MPNet {
  std::vector<std::uint64_t> address_space;
  std::vector<Area> areas;

  const Area* find_area(std::uint64_t address) const;
  Area* find_area(std::uint64_t address);
};

struct Defect {
  std::string code;
  std::string message;
};

/// Structural defects; empty when the net is well formed.
std::vector<Defect> validate(const MPNet& net);

/// Element name with its annotation-label prefix removed.
std::string_view base_name(std::string_view name);

MPNet merge_compound_places(MPNet net);
MPNet lower_location_arcs(MPNet net);
MPNet strip_control_flow(MPNet net);
/// Replace every fragment by its program net, directives applied.
MPNet attach_program_nets(MPNet net);

// Flattened, indexed form executed by the engine.

struct FlatPlace {
  std::uint64_t area = 0;
  std::string name;
  PlaceKind kind = PlaceKind::Multiset;
  Color color = Color::Any;
  std::optional<queue::Head> head;  // queue discipline; nullopt for multiset places
  std::vector<std::string> service_key;
  std::vector<Value> initial;
  bool terminal = false;

  std::string id() const;
};

struct FlatArc {
  std::size_t place = 0;
  ArcCategory category = ArcCategory::In;
  expr::InputArcExpr input;
  expr::OutputArcExpr output;
  int location_group = -1;
};

/// Arcs split from one location arc. At firing time the location must
/// evaluate to one of `areas` whenever `conditions` hold.
struct LocationGroup {
  std::vector<expr::ExprPtr> conditions;
  expr::ExprPtr location;
  std::vector<std::uint64_t> areas;
};

struct FlatTransition {
  std::uint64_t area = 0;
  std::string name;
  std::vector<FlatArc> inputs;
  std::vector<FlatArc> outputs;
  std::vector<LocationGroup> locations;
  expr::ExprPtr event;

  std::string id() const;
};

struct FlatControlArc {
  std::string source;  // element ids
  std::string target;
};

struct FlatNet {
  std::vector<std::uint64_t> address_space;
  std::vector<FlatPlace> places;
  std::vector<FlatTransition> transitions;
  std::vector<FlatControlArc> control_flow;  // only with keep_control_flow

  std::optional<std::size_t> place_index(std::uint64_t area, std::string_view name) const;
  std::optional<std::size_t> transition_index(std::string_view id) const;
};

struct FlattenOptions {
  bool keep_control_flow = false;
};

/// Validate, attach program nets, merge, lower locations, strip control flow
/// and index. Throws InvalidNet (listing defects) or the lowering errors.
FlatNet assemble_flat(const MPNet& net, const FlattenOptions& options = {});

std::string element_id(std::uint64_t area, std::string_view name);

}  // namespace mpnet::net
