#include "mpnet/net.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "mpnet/error.hpp"
#include "mpnet/program.hpp"

namespace mpnet::net {

namespace {

struct CategoryName {
  ArcCategory category;
  const char* name;
};

constexpr CategoryName kCategories[] = {
    {ArcCategory::In, "in"},
    {ArcCategory::InRo, "in-ro"},
    {ArcCategory::QinSingle, "qin-single"},
    {ArcCategory::QinDouble, "qin-double"},
    {ArcCategory::QinSingleRo, "qin-single-ro"},
    {ArcCategory::QinDoubleRo, "qin-double-ro"},
    {ArcCategory::Out, "out"},
    {ArcCategory::ControlFlow, "cf"},
};

using PlaceRef = std::pair<std::uint64_t, std::string>;

std::vector<const Area*> sorted_areas(const MPNet& net) {
  std::vector<const Area*> out;
  for (const auto& a : net.areas) out.push_back(&a);
  std::sort(out.begin(), out.end(),
            [](const Area* x, const Area* y) { return x->address < y->address; });
  return out;
}

std::uint64_t place_area(const Arc& arc, std::uint64_t owner) { return arc.remote.value_or(owner); }

}  // namespace

const char* to_string(PlaceKind k) { return k == PlaceKind::Queuing ? "queue" : "multiset"; }

std::optional<PlaceKind> place_kind_from_string(std::string_view s) {
  if (s == "queue" || s == "queuing") return PlaceKind::Queuing;
  if (s == "multiset") return PlaceKind::Multiset;
  return std::nullopt;
}

const char* to_string(ArcCategory c) {
  for (const auto& e : kCategories) {
    if (e.category == c) return e.name;
  }
  return "?";
}

std::optional<ArcCategory> category_from_string(std::string_view s) {
  for (const auto& e : kCategories) {
    if (s == e.name) return e.category;
  }
  return std::nullopt;
}

bool is_input(ArcCategory c) { return c != ArcCategory::Out && c != ArcCategory::ControlFlow; }

bool is_queuing(ArcCategory c) {
  return c == ArcCategory::QinSingle || c == ArcCategory::QinDouble ||
         c == ArcCategory::QinSingleRo || c == ArcCategory::QinDoubleRo;
}

bool is_read_only(ArcCategory c) {
  return c == ArcCategory::InRo || c == ArcCategory::QinSingleRo || c == ArcCategory::QinDoubleRo;
}

std::optional<queue::Head> head_of(ArcCategory c) {
  switch (c) {
    case ArcCategory::QinSingle:
    case ArcCategory::QinSingleRo: return queue::Head::Single;
    case ArcCategory::QinDouble:
    case ArcCategory::QinDoubleRo: return queue::Head::Double;
    default: return std::nullopt;
  }
}

ArcCategory queuing_category(queue::Head head, bool read_only) {
  if (head == queue::Head::Single) {
    return read_only ? ArcCategory::QinSingleRo : ArcCategory::QinSingle;
  }
  return read_only ? ArcCategory::QinDoubleRo : ArcCategory::QinDouble;
}

const std::string& Arc::place() const { return category == ArcCategory::Out ? target : source; }
const std::string& Arc::transition() const {
  return category == ArcCategory::Out ? source : target;
}

const Place* CommunicationNet::find_place(std::string_view name) const {
  for (const auto& p : places) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Place* CommunicationNet::find_place(std::string_view name) {
  for (auto& p : places) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const Transition* CommunicationNet::find_transition(std::string_view name) const {
  for (const auto& t : transitions) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const Area* MPNet::find_area(std::uint64_t address) const {
  for (const auto& a : areas) {
    if (a.address == address) return &a;
  }
  return nullptr;
}

Area* MPNet::find_area(std::uint64_t address) {
  for (auto& a : areas) {
    if (a.address == address) return &a;
  }
  return nullptr;
}

std::string_view base_name(std::string_view name) {
  auto pos = name.rfind(':');
  return pos == std::string_view::npos ? name : name.substr(pos + 1);
}

std::string element_id(std::uint64_t area, std::string_view name) {
  return std::to_string(area) + "/" + std::string(name);
}

namespace {

// Areas reachable through a location arc targeting `base`: (address used in
// the condition, area holding the place, place name).
std::vector<std::tuple<std::uint64_t, std::uint64_t, std::string>> location_targets(
    const MPNet& net, std::string_view base) {
  std::vector<std::tuple<std::uint64_t, std::uint64_t, std::string>> out;
  for (const Area* a : sorted_areas(net)) {
    for (const auto& p : a->net.places) {
      if (base_name(p.name) != base) continue;
      out.emplace_back(a->address, a->address, p.name);
      for (auto v : p.views) out.emplace_back(v, a->address, p.name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Defect> validate(const MPNet& net) {
  std::vector<Defect> defects;
  auto add = [&](std::string code, std::string message) {
    defects.push_back({std::move(code), std::move(message)});
  };

  std::set<std::uint64_t> addresses;
  for (const auto& a : net.areas) {
    if (!addresses.insert(a.address).second) {
      add("DuplicateAddress", "address " + std::to_string(a.address) + " used by two areas");
    }
    if (std::find(net.address_space.begin(), net.address_space.end(), a.address) ==
        net.address_space.end()) {
      add("UnknownAddress", "area " + std::to_string(a.address) + " is not in the address space");
    }
  }

  auto place_at = [&](std::uint64_t area, std::string_view name) -> const Place* {
    const Area* a = net.find_area(area);
    return a ? a->net.find_place(name) : nullptr;
  };

  // Head type per place, collected over every area's arcs.
  std::map<PlaceRef, std::set<queue::Head>> heads;

  for (const auto& area : net.areas) {
    const auto& cn = area.net;
    std::set<std::string> names;
    for (const auto& p : cn.places) {
      if (!names.insert(p.name).second) {
        add("DuplicateName", element_id(area.address, p.name) + " declared twice");
      }
      for (const auto& v : p.initial) {
        if (!admits(p.color, v)) {
          add("ColorMismatch", "initial token " + to_string(v) + " of " +
                                   element_id(area.address, p.name) + " is not admissible under " +
                                   to_string(p.color));
        }
      }
    }
    for (const auto& t : cn.transitions) {
      if (!names.insert(t.name).second) {
        add("DuplicateName", element_id(area.address, t.name) + " declared twice");
      }
    }

    for (const auto& arc : cn.arcs) {
      std::string what = std::string(to_string(arc.category)) + " arc " + arc.source + " -> " +
                         arc.target + " in area " + std::to_string(area.address);
      if (arc.category == ArcCategory::ControlFlow) {
        bool src_ok = cn.find_place(arc.source) || cn.find_transition(arc.source);
        bool dst_ok = cn.find_place(arc.target) || cn.find_transition(arc.target);
        if (!src_ok || !dst_ok) add("DanglingEndpoint", what);
        continue;
      }
      if (!cn.find_transition(arc.transition())) {
        add("DanglingEndpoint", what + ": no transition '" + arc.transition() + "'");
        continue;
      }
      if (arc.category == ArcCategory::Out) {
        if (arc.output.pattern.empty()) add("EmptyPattern", what);
        if (arc.output.location) {
          if (location_targets(net, base_name(arc.target)).empty()) {
            add("TargetPlaceMissing", what + ": no area has a place named '" +
                                          std::string(base_name(arc.target)) + "'");
          }
        } else if (!place_at(place_area(arc, area.address), arc.target)) {
          add("DanglingEndpoint", what + ": no place '" + arc.target + "'");
        }
        continue;
      }
      const Place* p = place_at(place_area(arc, area.address), arc.source);
      if (!p) {
        add("DanglingEndpoint", what + ": no place '" + arc.source + "'");
        continue;
      }
      if (arc.input.pattern.empty()) add("EmptyPattern", what);
      if (is_queuing(arc.category)) {
        if (p->kind != PlaceKind::Queuing) add("QInputFromMultiset", what);
        heads[{place_area(arc, area.address), p->name}].insert(*head_of(arc.category));
      } else if (p->kind == PlaceKind::Queuing) {
        add("InputFromQueuingPlace", what);
      }
    }

    if (area.fragment) {
      try {
        program::lower_fragment(*area.fragment, cn);
      } catch (const Error& e) {
        add(to_string(e.kind()), "area " + std::to_string(area.address) + ": " + e.what());
      }
    }
  }

  // Compound labels: consistent kind/colour/key, and one head type overall.
  std::map<std::string, std::vector<std::pair<PlaceRef, const Place*>>> groups;
  for (const Area* a : sorted_areas(net)) {
    for (const auto& p : a->net.places) {
      if (p.compound) groups[*p.compound].push_back({{a->address, p.name}, &p});
    }
  }
  for (const auto& [label, members] : groups) {
    const Place* first = members.front().second;
    std::set<queue::Head> label_heads;
    for (const auto& [ref, p] : members) {
      if (p->kind != first->kind || p->service_key != first->service_key) {
        add("CompoundKindMismatch", "compound label " + label + " joins places of different kind");
      }
      if (p->color != first->color) {
        add("CompoundColorMismatch",
            "compound label " + label + " joins places of different colour sets");
      }
      auto it = heads.find(ref);
      if (it != heads.end()) label_heads.insert(it->second.begin(), it->second.end());
      heads.erase(ref);
    }
    if (label_heads.size() > 1) {
      add("MixedHeadTypes", "compound place " + label + " has single- and double-headed arcs");
    }
  }
  for (const auto& [ref, hs] : heads) {
    if (hs.size() > 1) {
      add("MixedHeadTypes",
          element_id(ref.first, ref.second) + " has single- and double-headed arcs");
    }
  }
  return defects;
}

MPNet merge_compound_places(MPNet net) {
  std::sort(net.areas.begin(), net.areas.end(),
            [](const Area& x, const Area& y) { return x.address < y.address; });

  std::map<std::string, std::vector<PlaceRef>> groups;
  for (const auto& a : net.areas) {
    for (const auto& p : a.net.places) {
      if (p.compound) groups[*p.compound].push_back({a.address, p.name});
    }
  }

  std::map<PlaceRef, PlaceRef> redirect;
  for (auto& [label, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    const PlaceRef survivor_ref = members.front();
    Place* survivor = net.find_area(survivor_ref.first)->net.find_place(survivor_ref.second);
    std::set<std::uint64_t> views(survivor->views.begin(), survivor->views.end());
    for (std::size_t i = 1; i < members.size(); ++i) {
      const Place* p = net.find_area(members[i].first)->net.find_place(members[i].second);
      if (p->kind != survivor->kind || p->service_key != survivor->service_key) {
        throw Error(ErrorKind::CompoundKindMismatch,
                    "compound label " + label + " joins places of different kind");
      }
      if (p->color != survivor->color) {
        throw Error(ErrorKind::CompoundColorMismatch,
                    "compound label " + label + " joins places of different colour sets");
      }
      survivor->initial.insert(survivor->initial.end(), p->initial.begin(), p->initial.end());
      survivor->terminal = survivor->terminal || p->terminal;
      if (members[i].first != survivor_ref.first) views.insert(members[i].first);
      views.insert(p->views.begin(), p->views.end());
      redirect[members[i]] = survivor_ref;
    }
    views.erase(survivor_ref.first);
    survivor->views.assign(views.begin(), views.end());
  }
  if (redirect.empty()) return net;

  for (auto& a : net.areas) {
    auto& places = a.net.places;
    places.erase(std::remove_if(places.begin(), places.end(),
                                [&](const Place& p) {
                                  return redirect.count({a.address, p.name}) != 0;
                                }),
                 places.end());
    auto& arcs = a.net.arcs;
    arcs.erase(std::remove_if(arcs.begin(), arcs.end(),
                              [&](const Arc& arc) {
                                return arc.category == ArcCategory::ControlFlow &&
                                       (redirect.count({a.address, arc.source}) ||
                                        redirect.count({a.address, arc.target}));
                              }),
               arcs.end());
    for (auto& arc : arcs) {
      if (arc.category == ArcCategory::ControlFlow) continue;
      if (arc.category == ArcCategory::Out && arc.output.location) continue;
      auto it = redirect.find({place_area(arc, a.address), arc.place()});
      if (it == redirect.end()) continue;
      (arc.category == ArcCategory::Out ? arc.target : arc.source) = it->second.second;
      if (it->second.first == a.address) {
        arc.remote.reset();
      } else {
        arc.remote = it->second.first;
      }
    }
  }
  return net;
}

MPNet lower_location_arcs(MPNet net) {
  std::sort(net.areas.begin(), net.areas.end(),
            [](const Area& x, const Area& y) { return x.address < y.address; });
  const MPNet snapshot = net;
  for (auto& a : net.areas) {
    int next_group = 0;
    for (const auto& arc : a.net.arcs) {
      if (arc.location_group >= 0) next_group = std::max(next_group, arc.location_group + 1);
    }
    std::vector<Arc> arcs;
    for (auto& arc : a.net.arcs) {
      if (arc.category != ArcCategory::Out || !arc.output.location) {
        arcs.push_back(std::move(arc));
        continue;
      }
      auto targets = location_targets(snapshot, base_name(arc.target));
      if (targets.empty()) {
        throw Error(ErrorKind::TargetPlaceMissing,
                    "no area has a place named '" + std::string(base_name(arc.target)) + "'");
      }
      int group = next_group++;
      for (const auto& [cond_area, holder, name] : targets) {
        Arc split = arc;
        split.target = name;
        split.remote = holder == a.address ? std::nullopt : std::optional<std::uint64_t>(holder);
        split.output.location = nullptr;
        split.output.conditions.push_back(
            expr::binary(expr::BinOp::Eq, arc.output.location, expr::lit(Value::nat(cond_area))));
        split.lowered_location = arc.output.location;
        split.location_group = group;
        arcs.push_back(std::move(split));
      }
    }
    a.net.arcs = std::move(arcs);
  }
  return net;
}

MPNet strip_control_flow(MPNet net) {
  for (auto& a : net.areas) {
    auto& arcs = a.net.arcs;
    arcs.erase(std::remove_if(arcs.begin(), arcs.end(),
                              [](const Arc& arc) {
                                return arc.category == ArcCategory::ControlFlow;
                              }),
               arcs.end());
  }
  return net;
}

MPNet attach_program_nets(MPNet net) {
  for (auto& a : net.areas) {
    if (!a.fragment) continue;
    a.net = program::lower_fragment(*a.fragment, a.net);
    a.fragment.reset();
  }
  return net;
}

std::string FlatPlace::id() const { return element_id(area, name); }
std::string FlatTransition::id() const { return element_id(area, name); }

std::optional<std::size_t> FlatNet::place_index(std::uint64_t area, std::string_view name) const {
  for (std::size_t i = 0; i < places.size(); ++i) {
    if (places[i].area == area && places[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> FlatNet::transition_index(std::string_view id) const {
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i].id() == id) return i;
  }
  return std::nullopt;
}

FlatNet assemble_flat(const MPNet& input, const FlattenOptions& options) {
  auto defects = validate(input);
  if (!defects.empty()) {
    std::string msg;
    for (const auto& d : defects) msg += "\n  " + d.code + ": " + d.message;
    throw Error(ErrorKind::InvalidNet, std::to_string(defects.size()) + " defect(s)" + msg);
  }
  MPNet net = attach_program_nets(input);
  net = merge_compound_places(std::move(net));
  net = lower_location_arcs(std::move(net));

  FlatNet flat;
  flat.address_space = net.address_space;
  if (options.keep_control_flow) {
    for (const auto& a : net.areas) {
      for (const auto& arc : a.net.arcs) {
        if (arc.category == ArcCategory::ControlFlow) {
          flat.control_flow.push_back(
              {element_id(a.address, arc.source), element_id(a.address, arc.target)});
        }
      }
    }
  }
  net = strip_control_flow(std::move(net));

  std::map<PlaceRef, std::size_t> index;
  for (const auto& a : net.areas) {
    for (const auto& p : a.net.places) {
      FlatPlace fp;
      fp.area = a.address;
      fp.name = p.name;
      fp.kind = p.kind;
      fp.color = p.color;
      fp.service_key = p.service_key;
      fp.initial = p.initial;
      fp.terminal = p.terminal;
      if (p.kind == PlaceKind::Queuing) fp.head = queue::Head::Single;
      index[{a.address, p.name}] = flat.places.size();
      flat.places.push_back(std::move(fp));
    }
  }

  for (const auto& a : net.areas) {
    for (const auto& t : a.net.transitions) {
      FlatTransition ft;
      ft.area = a.address;
      ft.name = t.name;
      ft.event = t.event;
      std::map<int, std::size_t> groups;
      for (const auto& arc : a.net.arcs) {
        if (arc.transition() != t.name) continue;
        FlatArc fa;
        fa.place = index.at({place_area(arc, a.address), arc.place()});
        fa.category = arc.category;
        fa.input = arc.input;
        fa.output = arc.output;
        if (auto h = head_of(arc.category)) flat.places[fa.place].head = *h;
        if (arc.location_group >= 0) {
          auto [it, fresh] = groups.try_emplace(arc.location_group, ft.locations.size());
          if (fresh) {
            LocationGroup g;
            g.conditions.assign(arc.output.conditions.begin(), arc.output.conditions.end() - 1);
            g.location = arc.lowered_location;
            ft.locations.push_back(std::move(g));
          }
          const auto& last = *arc.output.conditions.back();
          ft.locations[it->second].areas.push_back(last.args[1]->value.as_nat());
          fa.location_group = static_cast<int>(it->second);
        }
        (is_input(arc.category) ? ft.inputs : ft.outputs).push_back(std::move(fa));
      }
      flat.transitions.push_back(std::move(ft));
    }
  }
  return flat;
}

}  // namespace mpnet::net
