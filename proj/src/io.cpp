#include "mpnet/io.hpp"

#include <array>
#include <cstdio>
#include <map>
#include <sstream>

#include "mpnet/error.hpp"
#include "mpnet/parser.hpp"

namespace mpnet::io {

namespace {

[[noreturn]] void format_error(const std::string& msg) { throw Error(ErrorKind::Format, msg); }

const json& member(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) format_error(std::string("missing key '") + key + "'");
  return j.at(key);
}

std::string str(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_string()) format_error(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

// Non-negative integers; documents built in memory may hold them signed.
bool is_natural(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::uint64_t nat(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!is_natural(v)) format_error(std::string("'") + key + "' must be a natural number");
  return v.get<std::uint64_t>();
}

const json& array(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_array()) format_error(std::string("'") + key + "' must be an array");
  return v;
}

json expr_json(const expr::ExprPtr& e) { return e ? json(expr::to_string(*e)) : json(nullptr); }

expr::ExprPtr expr_from(const json& j) {
  if (j.is_null()) return nullptr;
  if (!j.is_string()) format_error("expression must be a string");
  return expr::parse_expr(j.get<std::string>());
}

constexpr std::string_view kBase64 =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t n = (std::uint8_t(bytes[i]) << 16) | (std::uint8_t(bytes[i + 1]) << 8) |
                      std::uint8_t(bytes[i + 2]);
    for (int s = 18; s >= 0; s -= 6) out += kBase64[(n >> s) & 63];
  }
  std::size_t rest = bytes.size() - i;
  if (rest) {
    std::uint32_t n = std::uint8_t(bytes[i]) << 16;
    if (rest == 2) n |= std::uint8_t(bytes[i + 1]) << 8;
    out += kBase64[(n >> 18) & 63];
    out += kBase64[(n >> 12) & 63];
    out += rest == 2 ? kBase64[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) format_error("base64 length is not a multiple of 4");
  std::string out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t n = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      char c = text[i + k];
      std::uint32_t d = 0;
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
      } else {
        auto pos = kBase64.find(c);
        if (pos == std::string_view::npos || pad) format_error("invalid base64 text");
        d = static_cast<std::uint32_t>(pos);
      }
      n = (n << 6) | d;
    }
    out += static_cast<char>((n >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((n >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(n & 0xff);
  }
  return out;
}

json to_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Unit: return nullptr;
    case Value::Kind::Bool: return v.as_bool();
    case Value::Kind::Nat: return v.as_nat();
    case Value::Kind::Any: return "ANY";
    case Value::Kind::Opaque: return {{"opaque", base64_encode(v.bytes())}, {"origin", v.origin()}};
    case Value::Kind::Tuple: {
      json a = json::array();
      for (const auto& e : v.elements()) a.push_back(to_json(e));
      return a;
    }
    case Value::Kind::Record: {
      json o = json::object();
      for (const auto& [k, f] : v.fields()) o[k] = to_json(f);
      return o;
    }
  }
  return nullptr;
}

Value value_from_json(const json& j) {
  if (j.is_null()) return Value::unit();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (is_natural(j)) return Value::nat(j.get<std::uint64_t>());
  if (j.is_number()) format_error("only natural numbers are values: " + j.dump());
  if (j.is_string()) {
    if (j.get<std::string>() == "ANY") return Value::any();
    format_error("unexpected string value " + j.dump());
  }
  if (j.is_array()) {
    std::vector<Value> es;
    for (const auto& e : j) es.push_back(value_from_json(e));
    return Value::tuple(std::move(es));
  }
  // Record fields never hold strings other than "ANY", and base64 text is
  // never "ANY", so a string-valued "opaque" member marks an opaque value.
  if (j.contains("opaque") && j.at("opaque").is_string() && j.at("opaque") != "ANY") {
    std::string origin = j.contains("origin") && j.at("origin").is_string()
                             ? j.at("origin").get<std::string>()
                             : std::string();
    return Value::opaque(base64_decode(j.at("opaque").get<std::string>()), origin);
  }
  std::vector<Value::Field> fs;
  for (const auto& [k, e] : j.items()) fs.emplace_back(k, value_from_json(e));
  return Value::record(std::move(fs));
}

namespace {

json values_json(const std::vector<Value>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

std::vector<Value> values_from(const json& j) {
  if (!j.is_array()) format_error("expected an array of values");
  std::vector<Value> out;
  for (const auto& e : j) out.push_back(value_from_json(e));
  return out;
}

json place_json(const net::Place& p) {
  json j{{"name", p.name},
         {"kind", net::to_string(p.kind)},
         {"color", to_string(p.color)},
         {"initial", values_json(p.initial)}};
  if (p.compound) j["compound"] = *p.compound;
  if (!p.service_key.empty()) j["serviceKey"] = p.service_key;
  if (p.terminal) j["terminal"] = true;
  if (!p.views.empty()) j["views"] = p.views;
  return j;
}

net::Place place_from(const json& j) {
  net::Place p;
  p.name = str(j, "name");
  auto kind = net::place_kind_from_string(str(j, "kind"));
  if (!kind) format_error("unknown place kind " + j.at("kind").dump());
  p.kind = *kind;
  if (j.contains("color")) {
    auto c = color_from_string(str(j, "color"));
    if (!c) format_error("unknown colour set " + j.at("color").dump());
    p.color = *c;
  }
  if (j.contains("initial")) p.initial = values_from(j.at("initial"));
  if (j.contains("compound") && !j.at("compound").is_null()) p.compound = str(j, "compound");
  if (j.contains("serviceKey")) p.service_key = j.at("serviceKey").get<std::vector<std::string>>();
  if (j.contains("terminal")) p.terminal = j.at("terminal").get<bool>();
  if (j.contains("views")) p.views = j.at("views").get<std::vector<std::uint64_t>>();
  return p;
}

json arc_json(const net::Arc& a) {
  json j{{"category", net::to_string(a.category)}, {"source", a.source}, {"target", a.target}};
  if (a.remote) j["remote"] = *a.remote;
  if (a.category == net::ArcCategory::Out) {
    j["inscription"] = expr::to_string(a.output);
  } else if (a.category != net::ArcCategory::ControlFlow) {
    j["inscription"] = expr::to_string(a.input);
  }
  if (a.lowered_location) j["loweredLocation"] = expr::to_string(*a.lowered_location);
  if (a.location_group >= 0) j["locationGroup"] = a.location_group;
  return j;
}

net::Arc arc_from(const json& j) {
  net::Arc a;
  auto cat = net::category_from_string(str(j, "category"));
  if (!cat) format_error("unknown arc category " + j.at("category").dump());
  a.category = *cat;
  a.source = str(j, "source");
  a.target = str(j, "target");
  if (j.contains("remote") && !j.at("remote").is_null()) a.remote = nat(j, "remote");
  if (a.category == net::ArcCategory::Out) {
    a.output = expr::parse_output_arc(str(j, "inscription"));
  } else if (a.category != net::ArcCategory::ControlFlow) {
    a.input = expr::parse_input_arc(str(j, "inscription"));
  }
  if (j.contains("loweredLocation")) a.lowered_location = expr_from(j.at("loweredLocation"));
  if (j.contains("locationGroup")) a.location_group = j.at("locationGroup").get<int>();
  return a;
}

const char* kind_name(program::Directive::Kind k) {
  switch (k) {
    case program::Directive::Kind::Put: return "put";
    case program::Directive::Kind::Wait: return "wait";
    case program::Directive::Kind::Get: return "get";
  }
  return "?";
}

const char* kind_name(program::Statement::Kind k) {
  switch (k) {
    case program::Statement::Kind::NoOp: return "noop";
    case program::Statement::Kind::Assign: return "assign";
    case program::Statement::Kind::Branch: return "branch";
    case program::Statement::Kind::Call: return "call";
  }
  return "?";
}

json fragment_json(const program::Fragment& f) {
  json edges = json::array();
  for (const auto& e : f.edges) {
    json s{{"kind", kind_name(e.statement.kind)}};
    switch (e.statement.kind) {
      case program::Statement::Kind::NoOp: break;
      case program::Statement::Kind::Assign: {
        json as = json::array();
        for (const auto& [var, v] : e.statement.assignments) {
          as.push_back({{"var", var}, {"value", expr::to_string(*v)}});
        }
        s["assignments"] = as;
        break;
      }
      case program::Statement::Kind::Branch: s["condition"] = expr_json(e.statement.condition); break;
      case program::Statement::Kind::Call: s["text"] = e.statement.text; break;
    }
    json edge{{"from", e.from}, {"to", e.to}, {"statement", s}};
    if (e.annotation) {
      json ds = json::array();
      for (const auto& d : e.annotation->directives) {
        json dj{{"kind", kind_name(d.kind)}, {"place", d.place}};
        if (d.kind == program::Directive::Kind::Put) dj["value"] = expr_json(d.value);
        if (d.kind == program::Directive::Kind::Get) dj["variable"] = d.variable;
        ds.push_back(dj);
      }
      edge["annotation"] = {{"label", e.annotation->label}, {"directives", ds}};
    }
    edges.push_back(edge);
  }
  return {{"nodes", f.nodes},       {"entry", f.entry}, {"exit", f.exit},
          {"memory", to_json(f.memory)}, {"edges", edges}};
}

program::Fragment fragment_from(const json& j) {
  program::Fragment f;
  f.nodes = member(j, "nodes").get<std::vector<std::string>>();
  f.entry = str(j, "entry");
  f.exit = str(j, "exit");
  if (j.contains("memory")) f.memory = value_from_json(j.at("memory"));
  for (const auto& ej : array(j, "edges")) {
    program::Edge e;
    e.from = str(ej, "from");
    e.to = str(ej, "to");
    const json& s = member(ej, "statement");
    std::string kind = str(s, "kind");
    if (kind == "noop") {
      e.statement = program::Statement::noop();
    } else if (kind == "assign") {
      e.statement.kind = program::Statement::Kind::Assign;
      for (const auto& a : array(s, "assignments")) {
        e.statement.assignments.emplace_back(str(a, "var"), expr_from(member(a, "value")));
      }
    } else if (kind == "branch") {
      e.statement = program::Statement::branch(expr_from(member(s, "condition")));
    } else if (kind == "call") {
      e.statement = program::Statement::call(str(s, "text"));
    } else {
      format_error("unknown statement kind '" + kind + "'");
    }
    if (ej.contains("annotation") && !ej.at("annotation").is_null()) {
      const json& aj = ej.at("annotation");
      program::Annotation a;
      a.label = str(aj, "label");
      for (const auto& dj : array(aj, "directives")) {
        std::string dk = str(dj, "kind");
        if (dk == "put") {
          a.directives.push_back(program::Directive::put(str(dj, "place"), expr_from(member(dj, "value"))));
        } else if (dk == "wait") {
          a.directives.push_back(program::Directive::wait(str(dj, "place")));
        } else if (dk == "get") {
          a.directives.push_back(program::Directive::get(str(dj, "place"), str(dj, "variable")));
        } else {
          format_error("unknown directive kind '" + dk + "'");
        }
      }
      e.annotation = std::move(a);
    }
    f.edges.push_back(std::move(e));
  }
  return f;
}

}  // namespace

json to_json(const net::MPNet& net) {
  json areas = json::array();
  for (const auto& a : net.areas) {
    json places = json::array();
    for (const auto& p : a.net.places) places.push_back(place_json(p));
    json transitions = json::array();
    for (const auto& t : a.net.transitions) {
      json tj{{"name", t.name}};
      if (t.event) tj["event"] = expr::to_string(*t.event);
      transitions.push_back(tj);
    }
    json arcs = json::array();
    for (const auto& arc : a.net.arcs) arcs.push_back(arc_json(arc));
    areas.push_back({{"address", a.address},
                     {"name", a.name},
                     {"places", places},
                     {"transitions", transitions},
                     {"arcs", arcs},
                     {"fragment", a.fragment ? fragment_json(*a.fragment) : json(nullptr)}});
  }
  return {{"version", kFormatVersion}, {"addressSpace", net.address_space}, {"areas", areas}};
}

net::MPNet net_from_json(const json& j) {
  if (!j.is_object()) format_error("net document must be an object");
  if (nat(j, "version") != static_cast<std::uint64_t>(kFormatVersion)) {
    format_error("unsupported net format version " + j.at("version").dump());
  }
  net::MPNet net;
  for (const auto& a : array(j, "addressSpace")) {
    if (!is_natural(a)) format_error("addresses must be natural numbers");
    net.address_space.push_back(a.get<std::uint64_t>());
  }
  for (const auto& aj : array(j, "areas")) {
    net::Area area;
    area.address = nat(aj, "address");
    area.name = aj.contains("name") ? str(aj, "name") : std::to_string(area.address);
    for (const auto& p : array(aj, "places")) area.net.places.push_back(place_from(p));
    for (const auto& tj : array(aj, "transitions")) {
      net::Transition t;
      t.name = str(tj, "name");
      if (tj.contains("event")) t.event = expr_from(tj.at("event"));
      area.net.transitions.push_back(std::move(t));
    }
    for (const auto& arc : array(aj, "arcs")) area.net.arcs.push_back(arc_from(arc));
    if (aj.contains("fragment") && !aj.at("fragment").is_null()) {
      area.fragment = fragment_from(aj.at("fragment"));
    }
    net.areas.push_back(std::move(area));
  }
  return net;
}

std::string save_net(const net::MPNet& net) { return to_json(net).dump(2) + "\n"; }

net::MPNet load_net(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    format_error(std::string("malformed JSON: ") + e.what());
  }
  try {
    return net_from_json(j);
  } catch (const json::exception& e) {
    format_error(e.what());
  }
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t hash_from_hex(std::string_view s) {
  std::uint64_t h = 0;
  if (s.empty() || s.size() > 16) format_error("bad hash '" + std::string(s) + "'");
  for (char c : s) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else format_error("bad hash '" + std::string(s) + "'");
    h = (h << 4) | static_cast<std::uint64_t>(d);
  }
  return h;
}

json to_json(const engine::SimState& s, const net::FlatNet& net) {
  json places = json::array();
  json memory = json::object();
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    const auto& p = net.places[i];
    const engine::PlaceMarking* m = s.marking(i);
    json queue = json::array();
    json depository = json::array();
    if (m) {
      for (const auto& v : m->queue) queue.push_back(to_json(v));
      for (const auto& [v, c] : m->depository) depository.push_back({{"value", to_json(v)}, {"count", c}});
    }
    json pj{{"id", p.id()}, {"area", p.area}, {"name", p.name}, {"kind", net::to_string(p.kind)}};
    if (p.head) pj["queue"] = queue;
    pj["depository"] = depository;
    places.push_back(pj);
    if (p.name == "memory" && m && m->depository.size() == 1) {
      memory[std::to_string(p.area)] = to_json(m->depository.begin()->first);
    }
  }
  return {{"hash", hash_hex(s.hash())}, {"places", places}, {"memory", memory}};
}

json to_json(const engine::Candidate& c, const net::FlatNet& net) {
  json binding = json::object();
  for (const auto& [k, v] : c.binding) binding[k] = to_json(v);
  json selections = json::array();
  for (const auto& sel : c.selections) {
    selections.push_back({{"arc", sel.arc},
                          {"place", net.places[sel.place].id()},
                          {"tokens", values_json(sel.tokens)},
                          {"readOnly", sel.read_only}});
  }
  return {{"transition", net.transitions[c.transition].id()},
          {"binding", binding},
          {"selections", selections},
          {"stateHash", hash_hex(c.state_hash)}};
}

json to_json(const engine::TraceStep& step) {
  json binding = json::object();
  for (const auto& [k, v] : step.binding) binding[k] = to_json(v);
  return {{"step", step.step},
          {"transition", step.transition},
          {"candidate", step.candidate},
          {"binding", binding},
          {"preHash", hash_hex(step.pre_hash)},
          {"postHash", hash_hex(step.post_hash)},
          {"events", values_json(step.events)}};
}

engine::TraceStep trace_step_from_json(const json& j) {
  engine::TraceStep s;
  s.step = nat(j, "step");
  s.transition = str(j, "transition");
  s.candidate = nat(j, "candidate");
  if (j.contains("binding")) {
    for (const auto& [k, v] : member(j, "binding").items()) s.binding[k] = value_from_json(v);
  }
  s.pre_hash = hash_from_hex(str(j, "preHash"));
  s.post_hash = hash_from_hex(str(j, "postHash"));
  if (j.contains("events")) s.events = values_from(j.at("events"));
  return s;
}

std::string trace_to_jsonl(const engine::Trace& trace) {
  std::string out;
  for (const auto& s : trace.steps) out += to_json(s).dump() + "\n";
  return out;
}

std::vector<engine::TraceStep> trace_from_jsonl(std::string_view text) {
  std::vector<engine::TraceStep> steps;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      steps.push_back(trace_step_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      format_error(std::string("bad trace line: ") + e.what());
    }
  }
  return steps;
}

// DOT export.

namespace {

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

const char* arrowhead(net::ArcCategory c) {
  switch (c) {
    case net::ArcCategory::QinDouble: return "normalnormal";
    case net::ArcCategory::QinSingleRo:
    case net::ArcCategory::InRo: return "empty";
    case net::ArcCategory::QinDoubleRo: return "emptyempty";
    default: return "normal";
  }
}

std::string marking_label(const engine::PlaceMarking* m) {
  if (!m) return {};
  std::string out;
  if (!m->queue.empty()) {
    out += "\n<";
    for (std::size_t i = 0; i < m->queue.size(); ++i) out += (i ? ", " : "") + to_string(m->queue[i]);
  }
  if (!m->depository.empty()) {
    out += "\n{";
    bool first = true;
    for (const auto& [v, c] : m->depository) {
      out += (first ? "" : ", ") + (c > 1 ? std::to_string(c) + "x " : "") + to_string(v);
      first = false;
    }
    out += "}";
  }
  return out;
}

std::string place_node(const std::string& id, std::string_view name, net::PlaceKind kind,
                       const std::optional<std::string>& compound, const std::string& extra) {
  std::string fill = kind == net::PlaceKind::Queuing ? "white" : "gray80";
  std::string out = "    " + quote(id) + " [shape=ellipse, style=filled, fillcolor=" + fill +
                    ", label=" + quote(std::string(name) + extra);
  if (compound) out += ", xlabel=" + quote("[" + *compound + "]");
  return out + "];\n";
}

std::string transition_node(const std::string& id, std::string_view name) {
  return "    " + quote(id) + " [shape=box, label=" + quote(name) + "];\n";
}

struct DotArc {
  std::string from;
  std::string to;
  net::ArcCategory category;
  std::string label;
  bool conditional;
};

std::string edge(const DotArc& a) {
  std::string out = "  " + quote(a.from) + " -> " + quote(a.to) + " [";
  if (a.category == net::ArcCategory::ControlFlow) {
    return out + "color=gray, penwidth=0.5, arrowsize=0.5];\n";
  }
  out += "arrowhead=" + std::string(arrowhead(a.category));
  if (a.conditional) out += ", style=dashed";
  if (!a.label.empty()) out += ", label=" + quote(a.label);
  return out + "];\n";
}

std::string header() {
  return "digraph mpnet {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n"
         "  edge [fontname=\"Helvetica\", fontsize=10];\n";
}

DotArc dot_arc(const net::Arc& arc, std::uint64_t area) {
  DotArc d{};
  d.category = arc.category;
  std::string place_id = net::element_id(arc.remote.value_or(area), arc.place());
  if (arc.category == net::ArcCategory::ControlFlow) {
    d.from = net::element_id(area, arc.source);
    d.to = net::element_id(area, arc.target);
    return d;
  }
  if (arc.category == net::ArcCategory::Out) {
    d.from = net::element_id(area, arc.source);
    d.to = place_id;
    expr::OutputArcExpr shown = arc.output;
    if (arc.lowered_location) {
      shown.conditions.pop_back();
      shown.location = arc.lowered_location;
    }
    d.label = expr::to_string(shown);
    d.conditional = !shown.conditions.empty();
  } else {
    d.from = place_id;
    d.to = net::element_id(area, arc.target);
    d.label = expr::to_string(arc.input);
    d.conditional = !arc.input.conditions.empty();
  }
  return d;
}

}  // namespace

std::string to_dot(const net::MPNet& input, const DotOptions& options) {
  net::MPNet n = net::lower_location_arcs(net::attach_program_nets(input));
  std::string out = header();
  std::string edges;
  for (const auto& a : n.areas) {
    if (options.area && a.address != *options.area) continue;
    out += "  subgraph " + quote("cluster_" + std::to_string(a.address)) + " {\n";
    out += "    label=" + quote(a.name.empty() ? std::to_string(a.address) : a.name) + ";\n";
    for (const auto& p : a.net.places) {
      out += place_node(net::element_id(a.address, p.name), p.name, p.kind, p.compound, "");
    }
    for (const auto& t : a.net.transitions) {
      out += transition_node(net::element_id(a.address, t.name), t.name);
    }
    out += "  }\n";
    for (const auto& arc : a.net.arcs) {
      if (options.area && arc.remote && *arc.remote != *options.area) continue;
      edges += edge(dot_arc(arc, a.address));
    }
  }
  return out + edges + "}\n";
}

std::string to_dot(const net::FlatNet& net, const DotOptions& options) {
  std::map<std::uint64_t, std::string> clusters;
  for (std::size_t i = 0; i < net.places.size(); ++i) {
    const auto& p = net.places[i];
    if (options.area && p.area != *options.area) continue;
    std::string extra = options.marking ? marking_label(options.marking->marking(i)) : "";
    clusters[p.area] += place_node(p.id(), p.name, p.kind, std::nullopt, extra);
  }
  std::string edges;
  for (const auto& t : net.transitions) {
    if (options.area && t.area != *options.area) continue;
    clusters[t.area] += transition_node(t.id(), t.name);
    for (const auto& a : t.inputs) {
      const auto& p = net.places[a.place];
      edges += edge({p.id(), t.id(), a.category, expr::to_string(a.input), !a.input.conditions.empty()});
    }
    for (const auto& a : t.outputs) {
      const auto& p = net.places[a.place];
      edges += edge({t.id(), p.id(), a.category, expr::to_string(a.output), !a.output.conditions.empty()});
    }
  }
  for (const auto& c : net.control_flow) {
    edges += edge({c.source, c.target, net::ArcCategory::ControlFlow, "", false});
  }
  std::string out = header();
  for (const auto& [area, body] : clusters) {
    out += "  subgraph " + quote("cluster_" + std::to_string(area)) + " {\n";
    out += "    label=" + quote(std::to_string(area)) + ";\n" + body + "  }\n";
  }
  return out + edges + "}\n";
}

}  // namespace mpnet::io
