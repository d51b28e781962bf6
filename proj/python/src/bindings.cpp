#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mpnet/cli.hpp"
#include "mpnet/engine.hpp"
#include "mpnet/error.hpp"
#include "mpnet/io.hpp"
#include "mpnet/mpi.hpp"
#include "mpnet/parser.hpp"

namespace py = pybind11;
using namespace mpnet;

namespace {

// JSON crosses the boundary as text; the Python wrapper decodes it.
class Simulator {
 public:
  explicit Simulator(const std::string& net_json)
      : net_(std::make_shared<const net::FlatNet>(net::assemble_flat(io::load_net(net_json)))),
        engine_(net_),
        initial_(engine_.initial_state()),
        current_(initial_) {}

  std::string state() const { return io::to_json(current_, *net_).dump(); }
  std::string state_hash() const { return io::hash_hex(current_.hash()); }
  bool terminal() const { return engine_.is_terminal(current_); }

  std::string enabled() const {
    io::json list = io::json::array();
    for (const auto& c : engine_.enabled(current_)) list.push_back(io::to_json(c, *net_));
    return list.dump();
  }

  std::string fire(std::size_t index) {
    auto cs = engine_.enabled(current_);
    if (index >= cs.size()) throw py::index_error("candidate index out of range");
    auto r = engine_.fire(current_, cs[index]);
    current_ = std::move(r.state);
    io::json events = io::json::array();
    for (const auto& v : r.events) events.push_back(io::to_json(v));
    return events.dump();
  }

  void reset() { current_ = initial_; }

  std::string run(std::uint64_t seed, std::size_t max_steps) {
    auto t = engine::run(engine_, current_, engine::seeded_chooser(seed), max_steps);
    current_ = t.final_state;
    return io::trace_to_jsonl(t);
  }

  py::dict explore(std::size_t max_states) const {
    engine::Limits limits;
    limits.max_states = max_states;
    auto g = engine::explore(engine_, limits);
    auto o = engine::event_orderings(g, cli::source_projection());
    py::dict d;
    d["states"] = g.states.size();
    d["edges"] = g.edges.size();
    d["terminals"] = g.terminals.size();
    d["deadlocks"] = g.deadlocks.size();
    d["limit_exceeded"] = g.limit_exceeded;
    d["orderings"] = cli::format_orderings(o);
    return d;
  }

  std::string dot(bool with_marking) const {
    io::DotOptions opt;
    if (with_marking) opt.marking = &current_;
    return io::to_dot(*net_, opt);
  }

 private:
  std::shared_ptr<const net::FlatNet> net_;
  engine::Engine engine_;
  engine::SimState initial_;
  engine::SimState current_;
};

}  // namespace

PYBIND11_MODULE(_mpnet, m) {
  m.doc() = "Message-passing Petri net simulator core";

  py::register_exception<Error>(m, "MpnetError");

  m.def("build_mpi", [](const std::string& program, std::uint64_t ranks) {
    return io::save_net(mpi::expand(mpi::parse_program(program), ranks));
  }, py::arg("program"), py::arg("ranks"));

  m.def("eval_expr", [](const std::string& text, const std::string& binding_json) {
    Binding b;
    io::json j = io::json::parse(binding_json);
    for (const auto& [k, v] : j.items()) b[k] = io::value_from_json(v);
    return io::to_json(expr::eval(*expr::parse_expr(text), b)).dump();
  }, py::arg("text"), py::arg("binding_json") = "{}");

  m.def("net_dot", [](const std::string& net_json) { return io::to_dot(io::load_net(net_json)); });

  py::class_<Simulator>(m, "Simulator")
      .def(py::init<const std::string&>(), py::arg("net_json"))
      .def("state", &Simulator::state)
      .def("state_hash", &Simulator::state_hash)
      .def("terminal", &Simulator::terminal)
      .def("enabled", &Simulator::enabled)
      .def("fire", &Simulator::fire, py::arg("index"))
      .def("reset", &Simulator::reset)
      .def("run", &Simulator::run, py::arg("seed") = 0, py::arg("max_steps") = 1000)
      .def("explore", &Simulator::explore, py::arg("max_states") = 1'000'000)
      .def("dot", &Simulator::dot, py::arg("with_marking") = false);
}
