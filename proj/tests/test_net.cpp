#include <gtest/gtest.h>

#include <algorithm>

#include "mpnet/engine.hpp"
#include "mpnet/error.hpp"
#include "mpnet/net.hpp"
#include "mpnet/parser.hpp"
#include "support.hpp"

using namespace mpnet;
using namespace mpnet::net;
using support::area;
using support::cf;
using support::in;
using support::out;
using support::place;
using support::transition;

namespace {

// Two areas sharing compound place L1; each produces into it.
MPNet compound_pair() {
  MPNet n;
  n.address_space = {0, 1};
  for (std::uint64_t a : {0, 1}) {
    CommunicationNet cn;
    cn.places = {place("src", PlaceKind::Multiset, {}, {Value::nat(a)}),
                 place("shared", PlaceKind::Multiset, "L1")};
    cn.transitions = {transition("t")};
    cn.arcs = {in("src", "t", "x"), out("t", "shared", "x")};
    n.areas.push_back(area(a, cn));
  }
  return n;
}

// Area 0 sends `x @ loc` into `box`, present in areas 0 and 1.
MPNet located(const std::string& location) {
  MPNet n;
  n.address_space = {0, 1, 2};
  CommunicationNet c0;
  c0.places = {place("src", PlaceKind::Multiset, {}, {Value::nat(7)}), place("box")};
  c0.transitions = {transition("t")};
  c0.arcs = {in("src", "t", "x"), out("t", "box", "x @ " + location)};
  CommunicationNet c1;
  c1.places = {place("box")};
  CommunicationNet c2;
  c2.places = {place("box")};
  n.areas = {area(0, c0), area(1, c1), area(2, c2)};
  return n;
}

std::vector<std::string> codes(const MPNet& n) {
  std::vector<std::string> out;
  for (const auto& d : validate(n)) out.push_back(d.code);
  return out;
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::size_t count_places(const MPNet& n) {
  std::size_t k = 0;
  for (const auto& a : n.areas) k += a.net.places.size();
  return k;
}

std::size_t count_arcs(const MPNet& n, std::optional<ArcCategory> c = {}) {
  std::size_t k = 0;
  for (const auto& a : n.areas) {
    for (const auto& arc : a.net.arcs) k += !c || arc.category == *c;
  }
  return k;
}

// Order-insensitive structural signature for comparing lowering orders.
std::vector<std::string> signature(const MPNet& n) {
  std::vector<std::string> out;
  for (const auto& a : n.areas) {
    for (const auto& p : a.net.places) {
      out.push_back("P " + element_id(a.address, p.name) + " " + std::to_string(p.initial.size()));
    }
    for (const auto& arc : a.net.arcs) {
      std::string s = std::string(to_string(arc.category)) + " " +
                      element_id(a.address, arc.transition()) + " " +
                      element_id(arc.remote.value_or(a.address), arc.place());
      s += " " + (arc.category == ArcCategory::Out ? expr::to_string(arc.output)
                                                  : expr::to_string(arc.input));
      out.push_back(s);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Validate, WellFormedNetHasNoDefects) {
  EXPECT_TRUE(validate(compound_pair()).empty());
  EXPECT_TRUE(validate(located("1")).empty());
  EXPECT_TRUE(validate(MPNet{}).empty());
}

TEST(Validate, Defects) {
  auto n = compound_pair();
  n.areas[0].net.arcs.push_back(in("src", "t", "x", ArcCategory::QinSingle));
  EXPECT_TRUE(has(codes(n), "QInputFromMultiset"));

  n = compound_pair();
  n.areas[1].net.places[1].kind = PlaceKind::Queuing;
  EXPECT_TRUE(has(codes(n), "CompoundKindMismatch"));

  n = compound_pair();
  n.areas[1].net.places[1].color = Color::Nat;
  EXPECT_TRUE(has(codes(n), "CompoundColorMismatch"));

  n = compound_pair();
  n.areas[0].net.arcs.push_back(in("nowhere", "t", "x"));
  EXPECT_TRUE(has(codes(n), "DanglingEndpoint"));

  n = compound_pair();
  n.areas[0].net.places.push_back(place("q", PlaceKind::Queuing));
  n.areas[0].net.transitions.push_back(transition("u"));
  n.areas[0].net.arcs.push_back(in("q", "t", "x", ArcCategory::QinSingle));
  n.areas[0].net.arcs.push_back(in("q", "u", "y", ArcCategory::QinDouble));
  EXPECT_TRUE(has(codes(n), "MixedHeadTypes"));

  n = compound_pair();
  n.areas[0].net.places[0].color = Color::Bool;
  EXPECT_TRUE(has(codes(n), "ColorMismatch"));

  n = located("1");
  n.areas[0].net.arcs[1].target = "mailbox";
  EXPECT_TRUE(has(codes(n), "TargetPlaceMissing"));
}

TEST(Merge, CompoundPlacesBecomeOne) {
  auto merged = merge_compound_places(compound_pair());
  EXPECT_EQ(count_places(merged), 3u);
  EXPECT_EQ(merged.find_area(0)->net.find_place("shared")->views, std::vector<std::uint64_t>{1});
  EXPECT_EQ(merged.find_area(1)->net.find_place("shared"), nullptr);
  // Both producer arcs now point at the survivor in area 0.
  std::size_t producers = 0;
  for (const auto& a : merged.areas) {
    for (const auto& arc : a.net.arcs) {
      if (arc.category == ArcCategory::Out && arc.target == "shared" &&
          arc.remote.value_or(a.address) == 0) {
        ++producers;
      }
    }
  }
  EXPECT_EQ(producers, 2u);
}

TEST(Merge, InitialMarkingsAreUnioned) {
  auto n = compound_pair();
  n.areas[0].net.places[1].initial = {Value::nat(1)};
  n.areas[1].net.places[1].initial = {Value::nat(2), Value::nat(3)};
  auto merged = merge_compound_places(n);
  EXPECT_EQ(merged.find_area(0)->net.find_place("shared")->initial.size(), 3u);
}

TEST(Merge, IdentityWithoutCompoundsAndIdempotent) {
  auto n = located("1");
  EXPECT_EQ(signature(merge_compound_places(n)), signature(n));
  auto once = merge_compound_places(compound_pair());
  EXPECT_EQ(signature(merge_compound_places(once)), signature(once));
}

TEST(Merge, ThreeAsrViewsCollapse) {
  auto n = support::all_send_one(1, 2);
  std::size_t before = 0;
  for (const auto& a : n.areas) before += a.net.find_place("ASR") != nullptr;
  EXPECT_EQ(before, 3u);
  auto merged = merge_compound_places(n);
  std::size_t after = 0;
  for (const auto& a : merged.areas) after += a.net.find_place("ASR") != nullptr;
  EXPECT_EQ(after, 1u);
  EXPECT_EQ(merged.find_area(0)->net.find_place("ASR")->views.size(), 2u);
}

TEST(Lower, LocationBecomesConditionalArcs) {
  auto lowered = lower_location_arcs(located("0"));
  const auto& arcs = lowered.find_area(0)->net.arcs;
  std::vector<std::string> conds;
  for (const auto& arc : arcs) {
    if (arc.category != ArcCategory::Out) continue;
    EXPECT_EQ(arc.output.location, nullptr);
    ASSERT_EQ(arc.output.conditions.size(), 1u);
    conds.push_back(expr::to_string(*arc.output.conditions[0]));
  }
  EXPECT_EQ(conds, (std::vector<std::string>{"0 = 0", "0 = 1", "0 = 2"}));
  EXPECT_EQ(count_arcs(lowered), 4u);
}

TEST(Lower, RuntimeLocationRoutesToOneArea) {
  auto b = support::build(located("1"));
  auto s0 = b.engine->initial_state();
  auto cs = b.engine->enabled(s0);
  ASSERT_EQ(cs.size(), 1u);
  auto s1 = b.engine->fire(s0, cs[0]).state;
  for (std::uint64_t a : {0, 1, 2}) {
    auto idx = b.net->place_index(a, "box");
    const auto* m = s1.marking(*idx);
    EXPECT_EQ(m ? m->size() : 0u, a == 1 ? 1u : 0u) << "area " << a;
  }
}

TEST(Lower, PickAddressGivesOneSuccessorPerArea) {
  auto b = support::build(located("pick_address(0, 2)"));
  auto g = engine::explore(*b.engine);
  EXPECT_EQ(g.out_edges(0).size(), 3u);
  EXPECT_EQ(g.states.size(), 4u);
}

TEST(Lower, CommutesWithMerge) {
  auto n = compound_pair();
  n.areas[0].net.places.push_back(place("box", PlaceKind::Multiset, "B"));
  n.areas[1].net.places.push_back(place("box", PlaceKind::Multiset, "B"));
  n.areas[0].net.transitions.push_back(transition("u"));
  n.areas[0].net.arcs.push_back(out("u", "box", "1 @ 1"));
  ASSERT_TRUE(validate(n).empty());
  auto ml = merge_compound_places(lower_location_arcs(n));
  auto lm = lower_location_arcs(merge_compound_places(n));
  EXPECT_EQ(signature(ml), signature(lm));
}

TEST(Strip, RemovesOnlyControlFlow) {
  auto n = compound_pair();
  n.areas[0].net.arcs.push_back(cf("src", "t"));
  n.areas[0].net.arcs.push_back(cf("t", "t"));
  n.areas[1].net.arcs.push_back(cf("t", "shared"));
  auto stripped = strip_control_flow(n);
  EXPECT_EQ(count_arcs(stripped), count_arcs(n) - 3);
  EXPECT_EQ(count_arcs(stripped, ArcCategory::ControlFlow), 0u);
  EXPECT_EQ(signature(strip_control_flow(stripped)), signature(stripped));
  EXPECT_EQ(signature(strip_control_flow(compound_pair())), signature(compound_pair()));
}

TEST(Strip, StateGraphUnchanged) {
  auto n = support::all_send_one(1, 3);
  auto with_cf = attach_program_nets(n);
  std::size_t added = 0;
  for (auto& a : with_cf.areas) {
    for (const auto& t : a.net.transitions) {
      a.net.arcs.push_back(cf(t.name, t.name));
      ++added;
    }
  }
  ASSERT_GT(added, 0u);
  auto g1 = engine::explore(*support::build(n).engine);
  auto g2 = engine::explore(*support::build(with_cf).engine);
  ASSERT_EQ(g1.states.size(), g2.states.size());
  ASSERT_EQ(g1.edges.size(), g2.edges.size());
  for (std::size_t i = 0; i < g1.states.size(); ++i) EXPECT_EQ(g1.states[i], g2.states[i]);
}

TEST(Assemble, EmptyNet) {
  auto flat = assemble_flat(MPNet{});
  EXPECT_TRUE(flat.places.empty());
  EXPECT_TRUE(flat.transitions.empty());
}

TEST(Assemble, CompoundViewsOnly) {
  MPNet n;
  n.address_space = {0, 1};
  for (std::uint64_t a : {0, 1}) {
    CommunicationNet cn;
    cn.places = {place("shared", PlaceKind::Multiset, "L1", {Value::unit()})};
    n.areas.push_back(area(a, cn));
  }
  auto flat = assemble_flat(n);
  ASSERT_EQ(flat.places.size(), 1u);
  EXPECT_EQ(flat.places[0].initial.size(), 2u);
  EXPECT_TRUE(flat.transitions.empty());
}

TEST(Assemble, RejectsInvalidNet) {
  auto n = compound_pair();
  n.areas[0].net.arcs.push_back(in("nowhere", "t", "x"));
  try {
    assemble_flat(n);
    FAIL() << "expected InvalidNet";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidNet);
  }
}

TEST(Assemble, AllSendOneStructure) {
  for (int variant : {1, 2, 3}) {
    auto n = support::all_send_one(variant, 3);
    EXPECT_TRUE(validate(n).empty()) << "v" << variant;
    auto flat = assemble_flat(n);
    std::size_t asr = 0, broker = 0;
    for (const auto& p : flat.places) {
      asr += p.name == "ASR";
      EXPECT_FALSE(p.kind == PlaceKind::Queuing && !p.head) << p.id();
    }
    for (const auto& t : flat.transitions) {
      broker += t.name == "match";
      for (const auto& arcs : {t.inputs, t.outputs}) {
        for (const auto& a : arcs) {
          EXPECT_NE(a.category, ArcCategory::ControlFlow);
          EXPECT_EQ(a.output.location, nullptr);
          if (is_queuing(a.category)) EXPECT_EQ(flat.places[a.place].kind, PlaceKind::Queuing);
          if (a.category == ArcCategory::In || a.category == ArcCategory::InRo) {
            EXPECT_EQ(flat.places[a.place].kind, PlaceKind::Multiset);
          }
        }
      }
    }
    EXPECT_EQ(asr, 1u);
    EXPECT_EQ(broker, 1u);
    for (std::uint64_t r = 0; r < 3; ++r) {
      EXPECT_TRUE(flat.place_index(r, "memory")) << "v" << variant << " rank " << r;
    }
  }
}

TEST(Assemble, FrozenCounts) {
  // Regression values recorded from the structural checker at n = 3.
  const std::size_t places[] = {29, 29, 32};
  const std::size_t transitions[] = {18, 18, 22};
  for (int variant : {1, 2, 3}) {
    auto flat = assemble_flat(support::all_send_one(variant, 3));
    EXPECT_EQ(flat.places.size(), places[variant - 1]) << "v" << variant;
    EXPECT_EQ(flat.transitions.size(), transitions[variant - 1]) << "v" << variant;
  }
}

TEST(BaseName, StripsLabelPrefix) {
  EXPECT_EQ(base_name("send1:req"), "req");
  EXPECT_EQ(base_name("ASR"), "ASR");
  EXPECT_EQ(element_id(3, "ASR"), "3/ASR");
}
