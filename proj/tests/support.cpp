#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mpnet/parser.hpp"

namespace support {

using namespace mpnet;

std::string source_path(const std::string& relative) { return std::string(MPNET_SOURCE_DIR) + "/" + relative; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

net::MPNet all_send_one(int variant, int n) {
  auto text = read_file(source_path("samples/allsendone_v" + std::to_string(variant) + ".mpl"));
  return mpi::expand(mpi::parse_program(text), n);
}

Built build(const net::MPNet& n) {
  Built b;
  b.net = std::make_shared<const net::FlatNet>(net::assemble_flat(n));
  b.engine = std::make_unique<engine::Engine>(b.net);
  return b;
}

engine::Orderings source_orderings(const engine::StateGraph& g) {
  return engine::event_orderings(g, [](const Value& v) -> std::optional<Value> {
    if (const Value* s = v.field("src")) return *s;
    return std::nullopt;
  });
}

std::set<std::vector<Value>> to_values(const std::set<std::vector<int>>& s) {
  std::set<std::vector<Value>> out;
  for (const auto& seq : s) {
    std::vector<Value> vs;
    for (int x : seq) vs.push_back(Value::nat(static_cast<std::uint64_t>(x)));
    out.insert(vs);
  }
  return out;
}

std::set<std::vector<Value>> permutations(int n) {
  std::vector<int> p(n - 1);
  std::iota(p.begin(), p.end(), 1);
  std::set<std::vector<int>> out;
  do {
    out.insert(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return to_values(out);
}

namespace {

std::vector<Value> tokens(const engine::SimState& s, std::size_t place) {
  std::vector<Value> out;
  if (const auto* m = s.marking(place)) {
    out = m->queue;
    for (const auto& [v, c] : m->depository) out.insert(out.end(), c, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t asr(const net::FlatNet& net) {
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    if (net.places[i].name == mpi::kRequestPlace) return i;
  }
  throw std::runtime_error("no ASR place");
}

std::uint64_t nat_field(const Value& v, const char* f) {
  const Value* x = v.field(f);
  return x && x->is(Value::Kind::Nat) ? x->as_nat() : ~0ULL;
}

}  // namespace

std::size_t live_recvs(const engine::SimState& s, const net::FlatNet& net, std::uint64_t rank) {
  std::size_t n = 0;
  for (const auto& v : tokens(s, asr(net))) {
    n += nat_field(v, "op") == mpi::kOpRecv && nat_field(v, "destination") == rank;
  }
  return n;
}

long check_read_only(const engine::StateGraph& g, const net::FlatNet& net) {
  long checked = 0;
  for (const auto& e : g.edges) {
    const auto& t = net.transitions[e.transition];
    for (const auto& a : t.inputs) {
      if (!net::is_read_only(a.category)) continue;
      if (tokens(g.states[e.from], a.place) != tokens(g.states[e.to], a.place)) return -1;
      ++checked;
    }
  }
  return checked;
}

long check_non_overtaking(const engine::StateGraph& g, const net::FlatNet& net) {
  const std::size_t place = asr(net);
  long checked = 0;
  for (const auto& e : g.edges) {
    if (net.transitions[e.transition].name != mpi::kBrokerTransition) continue;
    if (e.events.size() != 1) return -1;
    const Value& ev = e.events.front();
    auto src = nat_field(ev, "src"), dst = nat_field(ev, "dst"), tag = nat_field(ev, "tag");
    const Value* rsrc = ev.field("rsrc");
    for (const auto& v : tokens(g.states[e.from], place)) {
      bool same_dst_tag = nat_field(v, "destination") == dst && nat_field(v, "tag") == tag;
      if (!same_dst_tag) continue;
      if (nat_field(v, "op") == mpi::kOpSend && nat_field(v, "source") == src &&
          nat_field(v, "reqId") < nat_field(ev, "sreq")) {
        return -1;
      }
      if (nat_field(v, "op") == mpi::kOpRecv && v.field("source") && *v.field("source") == *rsrc &&
          nat_field(v, "reqId") < nat_field(ev, "rreq")) {
        return -1;
      }
    }
    ++checked;
  }
  return checked;
}

using namespace mpnet::net;

Place place(std::string name, PlaceKind kind,
            std::optional<std::string> compound, std::vector<Value> initial) {
  Place p;
  p.name = std::move(name);
  p.kind = kind;
  p.compound = std::move(compound);
  p.initial = std::move(initial);
  return p;
}

Transition transition(std::string name, const std::string& event) {
  return {std::move(name), event.empty() ? nullptr : expr::parse_expr(event)};
}

Arc in(std::string place, std::string tr, const std::string& text,
       ArcCategory c) {
  Arc a;
  a.category = c;
  a.source = std::move(place);
  a.target = std::move(tr);
  a.input = expr::parse_input_arc(text);
  return a;
}

Arc out(std::string tr, std::string place, const std::string& text) {
  Arc a;
  a.category = ArcCategory::Out;
  a.source = std::move(tr);
  a.target = std::move(place);
  a.output = expr::parse_output_arc(text);
  return a;
}

Arc cf(std::string from, std::string to) {
  Arc a;
  a.category = ArcCategory::ControlFlow;
  a.source = std::move(from);
  a.target = std::move(to);
  return a;
}

Area area(std::uint64_t address, CommunicationNet cn) {
  Area a;
  a.address = address;
  a.name = "a" + std::to_string(address);
  a.net = std::move(cn);
  return a;
}

MPNet single(CommunicationNet cn) {
  MPNet n;
  n.address_space = {0};
  n.areas.push_back(area(0, std::move(cn)));
  return n;
}

net::MPNet to_mpnet(const oracle::PTNet& pt) {
  net::MPNet n;
  n.address_space = {0};
  net::Area a;
  a.address = 0;
  a.name = "pt";
  for (std::size_t p = 0; p < pt.places; ++p) {
    net::Place place;
    place.name = "p" + std::to_string(p);
    place.color = Color::Unit;
    place.initial.assign(pt.initial[p], Value::unit());
    a.net.places.push_back(place);
  }
  for (std::size_t t = 0; t < pt.pre.size(); ++t) {
    net::Transition tr;
    tr.name = "t" + std::to_string(t);
    a.net.transitions.push_back(tr);
    for (std::size_t p = 0; p < pt.places; ++p) {
      if (auto w = pt.pre[t][p]) {
        net::Arc arc;
        arc.category = net::ArcCategory::In;
        arc.source = "p" + std::to_string(p);
        arc.target = tr.name;
        arc.input.pattern.assign(w, expr::var(std::string(expr::kWildcard)));
        arc.input.size = std::uint64_t{w};
        a.net.arcs.push_back(arc);
      }
      if (auto w = pt.post[t][p]) {
        net::Arc arc;
        arc.category = net::ArcCategory::Out;
        arc.source = tr.name;
        arc.target = "p" + std::to_string(p);
        arc.output.pattern.assign(w, expr::lit(Value::unit()));
        a.net.arcs.push_back(arc);
      }
    }
  }
  n.areas.push_back(a);
  return n;
}

oracle::Marking marking_of(const engine::SimState& s, const net::FlatNet& net, std::size_t places) {
  oracle::Marking m(places, 0);
  for (std::size_t p = 0; p < places; ++p) {
    auto idx = net.place_index(0, "p" + std::to_string(p));
    if (const auto* pm = s.marking(*idx)) m[p] = static_cast<std::uint32_t>(pm->size());
  }
  return m;
}

std::set<oracle::Marking> engine_reach(const oracle::PTNet& pt, std::size_t depth) {
  auto b = build(to_mpnet(pt));
  engine::Limits limits;
  limits.max_depth = depth;
  auto g = engine::explore(*b.engine, limits);
  std::set<oracle::Marking> out;
  for (const auto& s : g.states) out.insert(marking_of(s, *b.net, pt.places));
  return out;
}

}  // namespace support
