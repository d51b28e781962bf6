#include "mpnet/service.hpp"

#include <atomic>
#include <shared_mutex>
#include <vector>

#include <httplib.h>

#include "mpnet/engine.hpp"
#include "mpnet/error.hpp"
#include "mpnet/io.hpp"

namespace mpnet::service {

using io::json;

struct Service::Session {
  std::shared_mutex mutex;
  net::MPNet source;
  std::shared_ptr<const net::FlatNet> flat;
  std::unique_ptr<engine::Engine> engine;
  engine::SimState initial;
  engine::SimState current;
  std::vector<engine::TraceStep> trace;
  std::vector<engine::SimState> undo;  // states before each trace step
  std::atomic<Clock::rep> last_used{0};  // refreshed by reads too
};

namespace {

Response reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

Response error(int status, const std::string& kind, const std::string& message) {
  return reply(status, {{"error", kind}, {"message", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

json state_json(const engine::Engine& e, const engine::SimState& s, std::size_t step) {
  json j = io::to_json(s, e.net());
  j["step"] = step;
  j["terminal"] = e.is_terminal(s);
  return j;
}

}  // namespace

Service::Service(Options options) : options_(std::move(options)) {}
Service::~Service() = default;

std::size_t Service::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::size_t Service::evict_idle() {
  auto now = options_.now();
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    // A session whose lock is held is in use; skip it this round.
    std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
    if (session_lock && now - Clock::time_point(Clock::duration(it->second->last_used.load())) >
                            options_.idle_timeout) {
      session_lock.unlock();
      it = sessions_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  return n;
}

std::shared_ptr<Service::Session> Service::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Response Service::handle(const Request& r) {
  evict_idle();
  auto parts = split_path(r.path);
  if (parts.empty() || parts[0] != "sessions") return error(404, "NotFound", "no route " + r.path);
  try {
    if (parts.size() == 1) {
      if (r.method == "POST") return create(r);
      if (r.method == "GET") {
        json ids = json::array();
        std::lock_guard lock(mutex_);
        for (const auto& [id, s] : sessions_) ids.push_back(id);
        return reply(200, {{"sessions", ids}});
      }
      return error(405, "MethodNotAllowed", r.method + " " + r.path);
    }
    auto session = find(parts[1]);
    if (!session) return error(404, "UnknownSession", "no session " + parts[1]);
    if (parts.size() == 2 && r.method == "DELETE") {
      std::lock_guard lock(mutex_);
      sessions_.erase(parts[1]);
      return reply(200, {{"deleted", parts[1]}});
    }
    if (parts.size() != 3) return error(404, "NotFound", "no route " + r.path);
    return dispatch(*session, parts[2], r);
  } catch (const SyntaxError& e) {
    return error(422, "SyntaxError", e.what());
  } catch (const Error& e) {
    return error(422, to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    return error(422, "Format", e.what());
  }
}

Response Service::create(const Request& r) {
  net::MPNet source;
  json body = r.body.empty() ? json::object() : json::parse(r.body);
  if (body.contains("netJson")) {
    const json& n = body.at("netJson");
    source = io::net_from_json(n.is_string() ? json::parse(n.get<std::string>()) : n);
  } else if (body.contains("version")) {
    source = io::net_from_json(body);
  } else if (options_.default_net) {
    source = *options_.default_net;
  } else {
    return error(422, "Format", "request carries no net (expected {\"netJson\": ...})");
  }
  auto defects = net::validate(source);
  if (!defects.empty()) {
    json list = json::array();
    for (const auto& d : defects) list.push_back({{"code", d.code}, {"message", d.message}});
    return reply(422, {{"error", "InvalidNet"}, {"message", "net failed validation"}, {"defects", list}});
  }
  auto s = std::make_shared<Session>();
  s->source = std::move(source);
  s->flat = std::make_shared<const net::FlatNet>(net::assemble_flat(s->source));
  s->engine = std::make_unique<engine::Engine>(s->flat);
  s->initial = s->engine->initial_state();
  s->current = s->initial;
  s->last_used = options_.now().time_since_epoch().count();
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_id_++);
    sessions_[id] = s;
  }
  return reply(201, {{"sessionId", id}, {"state", state_json(*s->engine, s->current, 0)}});
}

Response Service::dispatch(Session& s, const std::string& action, const Request& r) {
  const bool mutating = r.method == "POST";
  std::unique_lock<std::shared_mutex> write(s.mutex, std::defer_lock);
  std::shared_lock<std::shared_mutex> read(s.mutex, std::defer_lock);
  if (mutating) {
    write.lock();
  } else {
    read.lock();
  }
  s.last_used = options_.now().time_since_epoch().count();
  const auto& e = *s.engine;

  if (r.method == "GET" && action == "state") {
    return reply(200, state_json(e, s.current, s.trace.size()));
  }
  if (r.method == "GET" && action == "enabled") {
    auto cs = e.enabled(s.current);
    json list = json::array();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      json c = io::to_json(cs[i], e.net());
      c["index"] = i;
      list.push_back(c);
    }
    return reply(200, {{"stateHash", io::hash_hex(s.current.hash())}, {"candidates", list}});
  }
  if (r.method == "GET" && action == "net") {
    std::optional<std::uint64_t> area;
    if (auto it = r.query.find("area"); it != r.query.end() && !it->second.empty()) {
      try {
        area = std::stoull(it->second);
      } catch (const std::exception&) {
        for (const auto& a : s.source.areas) {
          if (a.name == it->second) area = a.address;
        }
      }
      if (!area) return error(404, "UnknownArea", "no area " + it->second);
    }
    auto fmt = r.query.count("format") ? r.query.at("format") : "json";
    bool flat = r.query.count("view") && r.query.at("view") == "flat";
    if (fmt == "dot") {
      io::DotOptions opt;
      opt.area = area;
      std::string text;
      if (flat) {
        opt.marking = &s.current;
        text = io::to_dot(e.net(), opt);
      } else {
        text = io::to_dot(s.source, opt);
      }
      return {200, text, "text/vnd.graphviz"};
    }
    if (fmt != "json") return error(422, "Format", "unknown format " + fmt);
    net::MPNet shown = s.source;
    if (area) {
      std::erase_if(shown.areas, [&](const net::Area& a) { return a.address != *area; });
    }
    return reply(200, io::to_json(shown));
  }
  if (r.method == "GET" && action == "trace") {
    if (r.query.count("format") && r.query.at("format") == "jsonl") {
      return {200, io::trace_to_jsonl({s.trace, s.current}), "application/x-ndjson"};
    }
    json steps = json::array();
    for (const auto& st : s.trace) steps.push_back(io::to_json(st));
    return reply(200, {{"initialHash", io::hash_hex(s.initial.hash())},
                       {"currentHash", io::hash_hex(s.current.hash())},
                       {"steps", steps}});
  }
  if (r.method == "POST" && action == "fire") {
    json body = r.body.empty() ? json::object() : json::parse(r.body);
    if (!body.contains("candidateIndex") || !body.at("candidateIndex").is_number_unsigned()) {
      return error(422, "Format", "candidateIndex (natural number) required");
    }
    if (body.contains("stateHash") &&
        io::hash_from_hex(body.at("stateHash").get<std::string>()) != s.current.hash()) {
      return error(409, "StaleCandidate", "state changed; refresh the enabled list");
    }
    auto cs = e.enabled(s.current);
    std::size_t index = body.at("candidateIndex").get<std::size_t>();
    if (index >= cs.size()) {
      return error(409, "StaleCandidate",
                   "candidate " + std::to_string(index) + " not in the enabled list of size " +
                       std::to_string(cs.size()));
    }
    auto result = e.fire(s.current, cs[index]);
    engine::TraceStep step;
    step.step = s.trace.size();
    step.transition = e.net().transitions[cs[index].transition].id();
    step.candidate = index;
    step.binding = cs[index].binding;
    step.pre_hash = s.current.hash();
    step.post_hash = result.state.hash();
    step.events = result.events;
    s.undo.push_back(s.current);
    s.trace.push_back(step);
    s.current = std::move(result.state);
    json events = json::array();
    for (const auto& v : step.events) events.push_back(io::to_json(v));
    return reply(200, {{"state", state_json(e, s.current, s.trace.size())},
                       {"events", events},
                       {"step", io::to_json(step)}});
  }
  if (r.method == "POST" && action == "undo") {
    if (s.undo.empty()) return error(409, "NothingToUndo", "trace is empty");
    s.current = std::move(s.undo.back());
    s.undo.pop_back();
    s.trace.pop_back();
    return reply(200, {{"state", state_json(e, s.current, s.trace.size())}});
  }
  if (r.method == "POST" && action == "reset") {
    s.current = s.initial;
    s.undo.clear();
    s.trace.clear();
    return reply(200, {{"state", state_json(e, s.current, 0)}});
  }
  return error(404, "NotFound", "no route " + r.method + " " + r.path);
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query[k] = v;
    Response out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Delete(".*", handler);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : impl_->server.bind_to_port(host, port) ? port : -1;
  if (bound < 0) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void serve(Service& service, const std::string& host, int port) {
  HttpServer server(service);
  server.bind(host, port);
  server.listen();
}

}  // namespace mpnet::service
