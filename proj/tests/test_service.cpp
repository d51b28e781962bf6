#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mpnet/cli.hpp"
#include "mpnet/io.hpp"
#include "mpnet/service.hpp"
#include "support.hpp"

using namespace mpnet;
using namespace mpnet::service;
using io::json;

namespace {

json body(const Response& r) { return json::parse(r.body); }

Response call(Service& s, const std::string& method, const std::string& path, const json& b = nullptr,
              std::map<std::string, std::string> query = {}) {
  return s.handle({method, path, std::move(query), b.is_null() ? "" : b.dump()});
}

std::string create(Service& s, int variant = 2, int n = 3) {
  auto r = call(s, "POST", "/sessions", {{"netJson", io::to_json(support::all_send_one(variant, n))}});
  EXPECT_EQ(r.status, 201) << r.body;
  return body(r)["sessionId"];
}

std::string hash_of(Service& s, const std::string& id) {
  return body(call(s, "GET", "/sessions/" + id + "/state"))["hash"];
}

Response fire(Service& s, const std::string& id, std::size_t index, std::optional<std::string> hash = {}) {
  json b = {{"candidateIndex", index}};
  if (hash) b["stateHash"] = *hash;
  return call(s, "POST", "/sessions/" + id + "/fire", b);
}

}  // namespace

TEST(Service, CreateForms) {
  Service s;
  auto text = io::save_net(support::all_send_one(1, 3));
  auto r = call(s, "POST", "/sessions", {{"netJson", text}});
  EXPECT_EQ(r.status, 201);
  EXPECT_FALSE(body(r)["state"]["terminal"].get<bool>());
  EXPECT_EQ(call(s, "POST", "/sessions", json::parse(text)).status, 201);
  auto none = call(s, "POST", "/sessions");
  EXPECT_EQ(none.status, 422);
  EXPECT_EQ(body(none)["error"], "Format");
  EXPECT_EQ(s.session_count(), 2u);
  EXPECT_EQ(body(call(s, "GET", "/sessions"))["sessions"].size(), 2u);

  Service d({.default_net = support::all_send_one(1, 3)});
  EXPECT_EQ(call(d, "POST", "/sessions").status, 201);
}

TEST(Service, InvalidNetIsRejected) {
  Service s;
  auto invalid = json::parse(support::read_file(support::source_path("tests/fixtures/invalid_net.json")));
  auto bad = call(s, "POST", "/sessions", {{"netJson", invalid}});
  EXPECT_EQ(bad.status, 422);
  EXPECT_EQ(body(bad)["error"], "InvalidNet");
  EXPECT_EQ(body(bad)["defects"][0]["code"], "QInputFromMultiset");
  auto malformed = call(s, "POST", "/sessions", {{"netJson", "{"}});
  EXPECT_EQ(malformed.status, 422);
  EXPECT_EQ(s.session_count(), 0u);
}

TEST(Service, UnknownRoutes) {
  Service s;
  EXPECT_EQ(body(call(s, "GET", "/sessions/s99/state"))["error"], "UnknownSession");
  EXPECT_EQ(call(s, "GET", "/sessions/s99/state").status, 404);
  EXPECT_EQ(call(s, "GET", "/nowhere").status, 404);
  auto id = create(s);
  EXPECT_EQ(call(s, "GET", "/sessions/" + id + "/frob").status, 404);
  EXPECT_EQ(call(s, "PUT", "/sessions").status, 405);
  EXPECT_EQ(call(s, "GET", "/sessions/" + id + "/net", nullptr, {{"area", "mars"}}).status, 404);
}

TEST(Service, StateAndEnabled) {
  Service s;
  auto id = create(s);
  auto st = body(call(s, "GET", "/sessions/" + id + "/state"));
  EXPECT_EQ(st["step"], 0);
  EXPECT_TRUE(st.contains("places"));
  auto en = body(call(s, "GET", "/sessions/" + id + "/enabled"));
  EXPECT_EQ(en["stateHash"], st["hash"]);
  ASSERT_FALSE(en["candidates"].empty());
  for (std::size_t i = 0; i < en["candidates"].size(); ++i) {
    EXPECT_EQ(en["candidates"][i]["index"], i);
    EXPECT_TRUE(en["candidates"][i].contains("binding"));
  }
}

TEST(Service, FireUndoReset) {
  Service s;
  auto id = create(s);
  auto h0 = hash_of(s, id);
  EXPECT_EQ(call(s, "POST", "/sessions/" + id + "/undo").status, 409);
  auto f = fire(s, id, 0, h0);
  ASSERT_EQ(f.status, 200) << f.body;
  EXPECT_EQ(body(f)["state"]["step"], 1);
  EXPECT_EQ(body(f)["step"]["preHash"], h0);
  auto h1 = hash_of(s, id);
  EXPECT_NE(h1, h0);

  auto stale = fire(s, id, 0, h0);
  EXPECT_EQ(stale.status, 409);
  EXPECT_EQ(body(stale)["error"], "StaleCandidate");
  EXPECT_EQ(fire(s, id, 999).status, 409);
  EXPECT_EQ(call(s, "POST", "/sessions/" + id + "/fire", {{"candidateIndex", -1}}).status, 422);
  EXPECT_EQ(hash_of(s, id), h1);

  EXPECT_EQ(call(s, "POST", "/sessions/" + id + "/undo").status, 200);
  EXPECT_EQ(hash_of(s, id), h0);
  fire(s, id, 0);
  fire(s, id, 0);
  auto reset = body(call(s, "POST", "/sessions/" + id + "/reset"));
  EXPECT_EQ(reset["state"]["hash"], h0);
  EXPECT_EQ(reset["state"]["step"], 0);
  EXPECT_TRUE(body(call(s, "GET", "/sessions/" + id + "/trace"))["steps"].empty());
}

TEST(Service, BrokerDecisionHasTwoOutcomes) {
  Service s;
  auto id = create(s, 2, 3);
  for (int step = 0; step < 200; ++step) {
    auto en = body(call(s, "GET", "/sessions/" + id + "/enabled"));
    ASSERT_FALSE(en["candidates"].empty()) << "no broker choice reached";
    std::vector<std::size_t> broker;
    for (const auto& c : en["candidates"]) {
      if (c["transition"].get<std::string>().rfind("3/", 0) == 0) broker.push_back(c["index"]);
    }
    if (broker.size() < 2) {
      fire(s, id, en["candidates"][0]["index"].get<std::size_t>());
      continue;
    }
    EXPECT_EQ(broker.size(), 2u);
    auto a = body(fire(s, id, broker[0]))["state"]["hash"];
    call(s, "POST", "/sessions/" + id + "/undo");
    auto b = body(fire(s, id, broker[1]))["state"]["hash"];
    EXPECT_NE(a, b);
    return;
  }
  FAIL() << "no broker choice within 200 steps";
}

TEST(Service, SessionsAreIndependentAndDeterministic) {
  Service s;
  auto a = create(s);
  auto b = create(s);
  EXPECT_NE(a, b);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(hash_of(s, a), hash_of(s, b));
    fire(s, a, 0);
    fire(s, b, 0);
  }
  fire(s, a, 0);
  EXPECT_NE(hash_of(s, a), hash_of(s, b));
  EXPECT_EQ(call(s, "DELETE", "/sessions/" + a).status, 200);
  EXPECT_EQ(call(s, "GET", "/sessions/" + a + "/state").status, 404);
  EXPECT_EQ(call(s, "GET", "/sessions/" + b + "/state").status, 200);
}

TEST(Service, NetViews) {
  Service s;
  auto id = create(s, 1, 3);
  auto net = call(s, "GET", "/sessions/" + id + "/net");
  EXPECT_EQ(net.status, 200);
  EXPECT_EQ(body(net)["areas"].size(), 4u);
  auto broker = body(call(s, "GET", "/sessions/" + id + "/net", nullptr, {{"area", "broker"}}));
  ASSERT_EQ(broker["areas"].size(), 1u);
  EXPECT_EQ(broker["areas"][0]["address"], 3);
  auto dot = call(s, "GET", "/sessions/" + id + "/net", nullptr, {{"format", "dot"}});
  EXPECT_EQ(dot.content_type, "text/vnd.graphviz");
  EXPECT_EQ(dot.body.rfind("digraph", 0), 0u);
  auto flat = call(s, "GET", "/sessions/" + id + "/net", nullptr, {{"format", "dot"}, {"view", "flat"}});
  EXPECT_EQ(flat.status, 200);
  EXPECT_NE(flat.body, dot.body);
  EXPECT_EQ(call(s, "GET", "/sessions/" + id + "/net", nullptr, {{"format", "svg"}}).status, 422);
}

TEST(Service, IdleSessionsAreEvicted) {
  auto now = Clock::time_point{};
  Service s({.idle_timeout = std::chrono::seconds(60), .now = [&] { return now; }});
  auto a = create(s);
  now += std::chrono::seconds(40);
  auto b = create(s);
  EXPECT_EQ(s.evict_idle(), 0u);
  now += std::chrono::seconds(30);
  EXPECT_EQ(s.evict_idle(), 1u);
  EXPECT_EQ(call(s, "GET", "/sessions/" + a + "/state").status, 404);
  now += std::chrono::seconds(20);
  EXPECT_EQ(call(s, "GET", "/sessions/" + b + "/state").status, 200);
  now += std::chrono::seconds(50);
  EXPECT_EQ(s.evict_idle(), 0u);
  now += std::chrono::seconds(11);
  EXPECT_EQ(s.evict_idle(), 1u);
  EXPECT_EQ(s.session_count(), 0u);
}

TEST(Service, TraceReplaysThroughCli) {
  Service s;
  auto id = create(s);
  for (int i = 0; i < 10; ++i) ASSERT_EQ(fire(s, id, i % 2).status, 200);
  auto trace = call(s, "GET", "/sessions/" + id + "/trace", nullptr, {{"format", "jsonl"}});
  EXPECT_EQ(trace.content_type, "application/x-ndjson");
  EXPECT_EQ(std::count(trace.body.begin(), trace.body.end(), '\n'), 10);
  auto full = body(call(s, "GET", "/sessions/" + id + "/trace"));
  EXPECT_EQ(full["steps"].size(), 10u);

  auto dir = std::filesystem::temp_directory_path() / "mpnet_service_replay";
  std::filesystem::create_directories(dir);
  auto net_path = (dir / "net.json").string();
  auto trace_path = (dir / "trace.jsonl").string();
  std::ofstream(net_path) << io::save_net(support::all_send_one(2, 3));
  std::ofstream(trace_path) << trace.body;
  std::ostringstream out, err;
  int code = cli::run({"run", net_path, "--replay", trace_path}, out, err);
  std::filesystem::remove_all(dir);
  EXPECT_EQ(code, cli::kOk) << err.str();
  EXPECT_NE(out.str().find("steps 10, final " + full["currentHash"].get<std::string>()), std::string::npos)
      << out.str();
}

TEST(Service, HttpRoundTrip) {
  Service s({.default_net = support::all_send_one(1, 3)});
  HttpServer server(s);
  int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  auto created = client.Post("/sessions", "", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  EXPECT_EQ(created->get_header_value("Access-Control-Allow-Origin"), "*");
  std::string id = json::parse(created->body)["sessionId"];
  auto en = client.Get("/sessions/" + id + "/enabled");
  ASSERT_TRUE(en);
  EXPECT_EQ(en->status, 200);
  auto fired = client.Post("/sessions/" + id + "/fire", R"({"candidateIndex": 0})", "application/json");
  ASSERT_TRUE(fired);
  EXPECT_EQ(fired->status, 200);
  auto dot = client.Get("/sessions/" + id + "/net?format=dot&area=0");
  ASSERT_TRUE(dot);
  EXPECT_EQ(dot->body.rfind("digraph", 0), 0u);
  auto gone = client.Delete("/sessions/" + id);
  ASSERT_TRUE(gone);
  EXPECT_EQ(gone->status, 200);
  server.stop();
  t.join();
}
