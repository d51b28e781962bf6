#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "mpnet/cli.hpp"
#include "mpnet/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using mpnet::cli::ExitCode;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = mpnet::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return support::source_path("tests/fixtures/" + name); }
std::string sample(int v) { return support::source_path("samples/allsendone_v" + std::to_string(v) + ".mpl"); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mpnet_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string built(int v, int n) {
    auto p = path("v" + std::to_string(v) + "_" + std::to_string(n) + ".json");
    auto r = cli({"build", sample(v), "-n", std::to_string(n), "-o", p});
    EXPECT_EQ(r.code, ExitCode::kOk) << r.err;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, BuildHappyPath) {
  auto p = built(1, 4);
  auto net = mpnet::io::load_net(support::read_file(p));
  EXPECT_EQ(net.areas.size(), 5u);
  auto r = cli({"build", fixture("pingpong.mpl"), "-n", "2"});
  EXPECT_EQ(r.code, ExitCode::kOk);
  EXPECT_EQ(r.out.rfind("{", 0), 0u);
  auto frag = cli({"build", "--fragment", fixture("counter.frag")});
  EXPECT_EQ(frag.code, ExitCode::kOk) << frag.err;
}

TEST_F(Cli, BuildDiagnostics) {
  auto r = cli({"build", fixture("broken.mpl"), "-n", "3"});
  EXPECT_EQ(r.code, ExitCode::kInvalid);
  EXPECT_NE(r.err.find("2:24: send is missing required argument 'tag'"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"build", fixture("unknown_call.mpl"), "-n", "2"}).code, ExitCode::kInvalid);
  auto s = cli({"build", fixture("bad_syntax.mpl"), "-n", "2"});
  EXPECT_EQ(s.code, ExitCode::kInvalid);
  EXPECT_NE(s.err.find("SyntaxError: 3:"), std::string::npos) << s.err;
  EXPECT_EQ(cli({"build", sample(1), "-n", "1"}).code, ExitCode::kInvalid);
  EXPECT_EQ(cli({"build", fixture("missing.mpl"), "-n", "2"}).code, ExitCode::kInvalid);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, ExitCode::kUsage);
  EXPECT_EQ(cli({"frob"}).code, ExitCode::kUsage);
  EXPECT_EQ(cli({"build", sample(1)}).code, ExitCode::kUsage);
  EXPECT_EQ(cli({"explore"}).code, ExitCode::kUsage);
  EXPECT_EQ(cli({"explore", fixture("invalid_net.json"), "--report", "pie"}).code, ExitCode::kUsage);
  EXPECT_EQ(cli({"--help"}).code, ExitCode::kOk);
}

TEST_F(Cli, InvalidNets) {
  auto r = cli({"explore", fixture("invalid_net.json")});
  EXPECT_EQ(r.code, ExitCode::kInvalid);
  EXPECT_NE(r.err.find("QInputFromMultiset"), std::string::npos);
  EXPECT_EQ(cli({"dot", fixture("invalid_net.json")}).code, ExitCode::kInvalid);
  EXPECT_EQ(cli({"run", fixture("malformed.json")}).code, ExitCode::kInvalid);
}

TEST_F(Cli, ExploreOrders) {
  auto r = cli({"explore", built(1, 4), "--report", "orders"});
  EXPECT_EQ(r.code, ExitCode::kOk);
  EXPECT_EQ(r.out, "1-2-3\n");
  auto v2 = cli({"explore", built(2, 3), "--report", "orders"});
  EXPECT_EQ(v2.out, "1-2\n2-1\n");
  auto d = cli({"explore", built(3, 3), "--report", "deadlocks"});
  EXPECT_EQ(d.out, "0 deadlock(s)\n");
  auto g = cli({"explore", built(1, 3), "--report", "graph"});
  auto j = mpnet::io::json::parse(g.out);
  EXPECT_FALSE(j["limitExceeded"].get<bool>());
  EXPECT_GT(j["states"].size(), 1u);
}

TEST_F(Cli, ExploreLimit) {
  auto p = built(3, 3);
  auto r = cli({"explore", p, "--max-states", "5"});
  EXPECT_EQ(r.code, ExitCode::kLimit);
  EXPECT_NE(r.err.find("exceeded"), std::string::npos);
  setenv("MPNET_MAX_STATES", "7", 1);
  EXPECT_EQ(mpnet::cli::default_max_states(), 7u);
  EXPECT_EQ(cli({"explore", p}).code, ExitCode::kLimit);
  unsetenv("MPNET_MAX_STATES");
  EXPECT_EQ(mpnet::cli::default_max_states(), 1'000'000u);
}

TEST_F(Cli, RunTraceAndReplay) {
  auto p = built(2, 3);
  auto trace = path("t.jsonl");
  auto r1 = cli({"run", p, "--seed", "42", "--trace", trace});
  EXPECT_EQ(r1.code, ExitCode::kOk) << r1.err;
  auto r2 = cli({"run", p, "--seed", "42"});
  EXPECT_EQ(r1.out, r2.out);
  auto final_line = r1.out.substr(r1.out.rfind("steps"));
  auto rp = cli({"run", p, "--replay", trace});
  EXPECT_EQ(rp.code, ExitCode::kOk) << rp.err;
  EXPECT_EQ(rp.out.substr(rp.out.rfind("steps")), final_line);
  auto zero = cli({"run", p, "--max-steps", "0"});
  EXPECT_NE(zero.out.find("steps 0"), std::string::npos);
}

TEST_F(Cli, DotExports) {
  auto p = built(1, 3);
  auto a = cli({"dot", p});
  auto b = cli({"dot", p});
  EXPECT_EQ(a.code, ExitCode::kOk);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("digraph", 0), 0u);
  auto area = cli({"dot", p, "--area", "broker"});
  EXPECT_NE(area.out.find("cluster_3"), std::string::npos);
  EXPECT_EQ(area.out.find("cluster_0"), std::string::npos);
  EXPECT_EQ(cli({"dot", p, "--area", "nowhere"}).code, ExitCode::kUsage);
  auto flat = cli({"dot", p, "--flat"});
  EXPECT_EQ(flat.code, ExitCode::kOk);
  auto trace = path("t.jsonl");
  cli({"run", p, "--seed", "3", "--trace", trace});
  auto overlay = cli({"dot", p, "--state", trace + ":2", "-o", path("m.dot")});
  EXPECT_EQ(overlay.code, ExitCode::kOk) << overlay.err;
  EXPECT_NE(support::read_file(path("m.dot")).find("\\n"), std::string::npos);
  EXPECT_EQ(cli({"dot", p, "--state", trace + ":999"}).code, ExitCode::kUsage);
}

TEST(CliHelpers, FormatOrderings) {
  mpnet::engine::Orderings o;
  o.sequences = support::to_values({{2, 1}, {1, 2}});
  EXPECT_EQ(mpnet::cli::format_orderings(o), (std::vector<std::string>{"1-2", "2-1"}));
  auto proj = mpnet::cli::source_projection();
  EXPECT_EQ(*proj(mpnet::Value::record({{"src", mpnet::Value::nat(4)}})), mpnet::Value::nat(4));
  EXPECT_EQ(*proj(mpnet::Value::nat(9)), mpnet::Value::nat(9));
}
