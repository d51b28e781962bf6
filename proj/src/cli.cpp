#include "mpnet/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mpnet/error.hpp"
#include "mpnet/io.hpp"
#include "mpnet/mpi.hpp"
#include "mpnet/program.hpp"
#include "mpnet/service.hpp"

namespace mpnet::cli {

namespace {

struct Failure {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kInvalid, path + ": cannot read file"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure{kInvalid, path + ": cannot write file"};
  f << text;
}

net::MPNet load(const std::string& path) {
  try {
    return io::load_net(read_file(path));
  } catch (const Error& e) {
    throw Failure{kInvalid, path + ": " + e.what()};
  }
}

std::shared_ptr<const net::FlatNet> flatten(const net::MPNet& n, const std::string& path) {
  try {
    return std::make_shared<const net::FlatNet>(net::assemble_flat(n));
  } catch (const Error& e) {
    throw Failure{kInvalid, path + ": " + e.what()};
  }
}

std::optional<std::uint64_t> area_of(const net::MPNet& n, const std::string& area) {
  if (area.empty()) return std::nullopt;
  for (const auto& a : n.areas) {
    if (a.name == area || std::to_string(a.address) == area) return a.address;
  }
  throw Failure{kUsage, "no area '" + area + "'"};
}

// --state FILE[:STEP]: marking after replaying the first STEP trace steps.
engine::SimState state_from_trace(const engine::Engine& e, const std::string& spec) {
  std::string file = spec;
  std::optional<std::size_t> upto;
  if (auto colon = spec.rfind(':'); colon != std::string::npos &&
                                    spec.find_first_not_of("0123456789", colon + 1) == std::string::npos &&
                                    colon + 1 < spec.size()) {
    file = spec.substr(0, colon);
    upto = std::stoull(spec.substr(colon + 1));
  }
  auto steps = io::trace_from_jsonl(read_file(file));
  if (upto) {
    if (*upto > steps.size()) throw Failure{kUsage, "trace has only " + std::to_string(steps.size()) + " steps"};
    steps.resize(*upto);
  }
  return engine::replay(e, e.initial_state(), steps).final_state;
}

int cmd_build(const std::string& file, std::uint64_t ranks, bool fragment, const std::string& output,
              std::ostream& out) {
  std::string text = read_file(file);
  net::MPNet n;
  try {
    if (fragment) {
      auto src = program::parse_fragment(text);
      net::Area area;
      area.address = 0;
      area.name = "main";
      area.fragment = std::move(src.fragment);
      area.net = std::move(src.net);
      n.address_space = {0};
      n.areas.push_back(std::move(area));
    } else {
      n = mpi::expand(mpi::parse_program(text), ranks);
    }
    net::assemble_flat(n);  // validation plus lowering checks
  } catch (const Error& e) {
    throw Failure{kInvalid, file + ": " + e.what()};
  }
  write_output(output, io::save_net(n), out);
  return kOk;
}

int cmd_dot(const std::string& file, const std::string& area, bool flat, const std::string& state,
            const std::string& output, std::ostream& out) {
  auto n = load(file);
  io::DotOptions opt;
  opt.area = area_of(n, area);
  if (!flat && state.empty()) {
    auto defects = net::validate(n);
    if (!defects.empty()) flatten(n, file);  // throws with the defect list
    write_output(output, io::to_dot(n, opt), out);
    return kOk;
  }
  auto net = flatten(n, file);
  engine::Engine e(net);
  std::optional<engine::SimState> s;
  if (!state.empty()) {
    try {
      s = state_from_trace(e, state);
    } catch (const Error& err) {
      throw Failure{kInvalid, state + ": " + err.what()};
    }
    opt.marking = &*s;
  }
  write_output(output, io::to_dot(*net, opt), out);
  return kOk;
}

int cmd_explore(const std::string& file, std::size_t max_states, const std::string& report,
                std::ostream& out, std::ostream& err) {
  auto n = load(file);
  auto net = flatten(n, file);
  engine::Engine e(net);
  engine::Limits limits;
  limits.max_states = max_states;
  engine::StateGraph g;
  try {
    g = engine::explore(e, limits);
  } catch (const Error& x) {
    throw Failure{kInvalid, file + ": " + x.what()};
  }
  if (report == "orders") {
    auto o = engine::event_orderings(g, source_projection());
    for (const auto& line : format_orderings(o)) out << line << "\n";
    if (o.cyclic) err << "note: state graph has cycles; orderings cover acyclic paths only\n";
  } else if (report == "deadlocks") {
    out << g.deadlocks.size() << " deadlock(s)\n";
    for (auto d : g.deadlocks) {
      out << "state " << d << " (" << io::hash_hex(g.states[d].hash()) << ")\n"
          << e.describe(g.states[d]);
    }
  } else {
    io::json states = io::json::array();
    std::vector<char> terminal(g.states.size(), 0), dead(g.states.size(), 0);
    for (auto t : g.terminals) terminal[t] = 1;
    for (auto d : g.deadlocks) dead[d] = 1;
    for (std::size_t i = 0; i < g.states.size(); ++i) {
      states.push_back({{"id", i},
                        {"hash", io::hash_hex(g.states[i].hash())},
                        {"depth", g.depth[i]},
                        {"terminal", terminal[i] != 0},
                        {"deadlock", dead[i] != 0}});
    }
    io::json edges = io::json::array();
    for (const auto& ed : g.edges) {
      io::json events = io::json::array();
      for (const auto& v : ed.events) events.push_back(io::to_json(v));
      edges.push_back({{"from", ed.from},
                       {"to", ed.to},
                       {"transition", net->transitions[ed.transition].id()},
                       {"candidate", ed.candidate},
                       {"events", events}});
    }
    out << io::json{{"states", states}, {"edges", edges}, {"limitExceeded", g.limit_exceeded}}.dump(1)
        << "\n";
  }
  err << g.states.size() << " states, " << g.edges.size() << " edges, " << g.terminals.size()
      << " terminal, " << g.deadlocks.size() << " deadlocked\n";
  if (g.limit_exceeded) {
    err << "state limit " << max_states << " exceeded; results are partial\n";
    return kLimit;
  }
  return kOk;
}

int cmd_run(const std::string& file, std::uint64_t seed, std::size_t max_steps, const std::string& trace_out,
            const std::string& replay_in, std::ostream& out) {
  auto n = load(file);
  auto net = flatten(n, file);
  engine::Engine e(net);
  engine::Trace t;
  try {
    if (!replay_in.empty()) {
      t = engine::replay(e, e.initial_state(), io::trace_from_jsonl(read_file(replay_in)));
    } else {
      t = engine::run(e, e.initial_state(), engine::seeded_chooser(seed), max_steps);
    }
  } catch (const Error& x) {
    throw Failure{kInvalid, x.what()};
  }
  if (!trace_out.empty()) write_output(trace_out, io::trace_to_jsonl(t), out);
  for (const auto& s : t.steps) {
    out << s.step << " " << s.transition;
    for (const auto& v : s.events) out << " " << to_string(v);
    out << "\n";
  }
  bool terminal = e.is_terminal(t.final_state);
  bool stuck = e.enabled(t.final_state).empty();
  out << "steps " << t.steps.size() << ", final " << io::hash_hex(t.final_state.hash())
      << (terminal ? ", terminal" : stuck ? ", deadlocked" : ", running") << "\n";
  return kOk;
}

int cmd_serve(const std::string& file, const std::string& host, int port, std::ostream& err) {
  service::Options opt;
  if (!file.empty()) {
    opt.default_net = load(file);
    flatten(*opt.default_net, file);
  }
  service::Service svc(std::move(opt));
  err << "serving on http://" << host << ":" << port << "\n";
  service::serve(svc, host, port);
  return kOk;
}

}  // namespace

std::size_t default_max_states() {
  if (const char* v = std::getenv("MPNET_MAX_STATES")) {
    try {
      std::size_t pos = 0;
      std::size_t n = std::stoull(v, &pos);
      if (pos == std::string(v).size() && n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return 1'000'000;
}

engine::EventProjection source_projection() {
  return [](const Value& v) -> std::optional<Value> {
    if (const Value* s = v.field("src")) return *s;
    return v;
  };
}

std::vector<std::string> format_orderings(const engine::Orderings& o) {
  std::vector<std::string> lines;
  for (const auto& seq : o.sequences) {
    std::string line;
    for (std::size_t i = 0; i < seq.size(); ++i) line += (i ? "-" : "") + to_string(seq[i]);
    lines.push_back(line);
  }
  return lines;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and explore message-passing Petri nets", "mpnet"};
  app.require_subcommand(1);

  std::string file, output, area, state, report = "orders", trace_out, replay_in, host = "127.0.0.1";
  std::uint64_t ranks = 0, seed = 0;
  std::size_t max_states = default_max_states(), max_steps = 1000;
  bool fragment = false, flat = false;
  int port = 8080;

  auto* build = app.add_subcommand("build", "Expand an MPI program (or annotated fragment) into net JSON");
  build->add_option("file", file, "program (.mpl) or fragment file")->required();
  build->add_option("-n,--ranks", ranks, "number of ranks");
  build->add_flag("--fragment", fragment, "input is an annotated fragment");
  build->add_option("-o,--output", output, "output file (default stdout)");

  auto* dot = app.add_subcommand("dot", "Export a net as Graphviz DOT");
  dot->add_option("net", file, "net JSON")->required();
  dot->add_option("--area", area, "only this area (name or address)");
  dot->add_flag("--flat", flat, "draw the assembled flat net");
  dot->add_option("--state", state, "overlay the marking after trace FILE[:STEP]");
  dot->add_option("-o,--output", output, "output file (default stdout)");

  auto* explore = app.add_subcommand("explore", "Exhaustively explore the state space");
  explore->add_option("net", file, "net JSON")->required();
  explore->add_option("--max-states", max_states, "state limit (env MPNET_MAX_STATES)");
  explore->add_option("--report", report, "orders | deadlocks | graph")
      ->check(CLI::IsMember({"orders", "deadlocks", "graph"}));

  auto* runc = app.add_subcommand("run", "Random or replayed simulation");
  runc->add_option("net", file, "net JSON")->required();
  runc->add_option("--seed", seed, "chooser seed");
  runc->add_option("--max-steps", max_steps, "step bound");
  runc->add_option("--trace", trace_out, "write the trace as JSON lines");
  runc->add_option("--replay", replay_in, "re-fire a recorded trace");

  auto* serve = app.add_subcommand("serve", "Start the HTTP simulation service");
  serve->add_option("net", file, "net JSON offered to sessions created without a body");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "bind address");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (build->parsed() && !fragment && ranks == 0) {
      throw CLI::RequiredError("--ranks (unless --fragment)");
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (build->parsed()) return cmd_build(file, ranks, fragment, output, out);
    if (dot->parsed()) return cmd_dot(file, area, flat, state, output, out);
    if (explore->parsed()) return cmd_explore(file, max_states, report, out, err);
    if (runc->parsed()) return cmd_run(file, seed, max_steps, trace_out, replay_in, out);
    if (serve->parsed()) return cmd_serve(file, host, port, err);
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}

}  // namespace mpnet::cli
