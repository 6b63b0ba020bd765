#include <atomic>
#include <functional>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "forkrl/envs/bridge.hpp"
#include "forkrl/errors.hpp"

using namespace forkrl;
using namespace forkrl::envs;
using nlohmann::json;
namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

// Replies with the raw line returned by the handler; an empty string closes
// the connection.
using Handler = std::function<std::string(const json& request)>;

class MockServer {
 public:
  explicit MockServer(Handler handler)
      : handler_(std::move(handler)), acceptor_(io_, tcp::endpoint(asio::ip::address_v4::loopback(), 0)) {
    port_ = acceptor_.local_endpoint().port();
    thread_ = std::thread([this] { serve(); });
  }
  ~MockServer() { join(); }

  // Waits for the client session to end.
  void join() {
    if (!thread_.joinable()) return;
    boost::system::error_code ec;
    acceptor_.close(ec);
    thread_.join();
  }

  std::string address() const { return "127.0.0.1:" + std::to_string(port_); }

  std::vector<json> received() {
    std::lock_guard lock(mu_);
    return received_;
  }

 private:
  void serve() {
    boost::system::error_code ec;
    tcp::socket sock(io_);
    acceptor_.accept(sock, ec);
    if (ec) return;
    asio::streambuf buf;
    while (true) {
      asio::read_until(sock, buf, '\n', ec);
      if (ec) return;
      std::istream in(&buf);
      std::string line;
      std::getline(in, line);
      json req = json::parse(line, nullptr, false);
      {
        std::lock_guard lock(mu_);
        received_.push_back(req);
      }
      const std::string reply = handler_(req);
      if (reply.empty()) return;
      asio::write(sock, asio::buffer(reply + "\n"), ec);
      if (ec) return;
    }
  }

  Handler handler_;
  asio::io_context io_;
  tcp::acceptor acceptor_;
  std::uint16_t port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::vector<json> received_;
};

const json kSpec = {{"obs_dim", 3},         {"act_dim", 2},
                    {"action_low", {-1.0, -2.0}}, {"action_high", {1.0, 2.0}},
                    {"max_steps", 1600.0}};

// A well-behaved scripted environment: the state counts steps.
std::string scripted(const json& req, int& t) {
  const std::string cmd = req.value("cmd", "");
  if (cmd == "spec") return kSpec.dump();
  if (cmd == "reset") {
    t = 0;
    return json{{"state", {req["seed"].get<double>(), 0.0, 0.0}}}.dump();
  }
  if (cmd == "step") {
    ++t;
    const bool fell = req["action"][0].get<double>() < -0.5;
    return json{{"state", {0.0, static_cast<double>(t), req["action"][1]}},
                {"reward", fell ? -100.0 : 0.25},
                {"done", fell},
                {"timeout", false},
                {"fell_down", fell},
                {"extra_field_ignored", "x"}}
        .dump();
  }
  if (cmd == "close") return "";
  return json{{"error", "unknown command"}}.dump();
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Bridge, SpecIsTakenFromServer) {
  int t = 0;
  MockServer server([&](const json& r) { return scripted(r, t); });
  BridgeEnv env(server.address());
  const auto& spec = env.spec();
  EXPECT_EQ(spec.obs_dim, 3u);
  EXPECT_EQ(spec.act_dim, 2u);
  EXPECT_EQ(spec.action_low, vec2(-1.0, -2.0));
  EXPECT_EQ(spec.action_high, vec2(1.0, 2.0));
  EXPECT_EQ(spec.max_episode_steps, 1600u);
  EXPECT_FALSE(env.supports_snapshot());
}

TEST(Bridge, ResetStepAndRawRewards) {
  int t = 0;
  MockServer server([&](const json& r) { return scripted(r, t); });
  {
    BridgeEnv env(server.address());
    const Vector s0 = env.reset(42);
    EXPECT_EQ(s0[0], 42.0);
    const auto r1 = env.step(vec2(0.0, 1.5));
    EXPECT_EQ(r1.next_state[1], 1.0);
    EXPECT_EQ(r1.next_state[2], 1.5);
    EXPECT_EQ(r1.reward, 0.25);
    EXPECT_FALSE(r1.done);
    const auto r2 = env.step(vec2(-1.0, 0.0));
    EXPECT_EQ(r2.reward, -100.0);
    EXPECT_TRUE(r2.done);
    EXPECT_FALSE(r2.done_is_timeout);
    EXPECT_TRUE(r2.fell_down());
  }
  server.join();
  const auto log = server.received();
  ASSERT_EQ(log.size(), 5u);
  EXPECT_EQ(log[0]["cmd"], "spec");
  EXPECT_EQ(log[1]["cmd"], "reset");
  EXPECT_TRUE(log[1]["seed"].is_number());
  EXPECT_EQ(log[2]["action"].size(), 2u);
  EXPECT_EQ(log.back()["cmd"], "close");
}

TEST(Bridge, WrongActionSizeNeverReachesTheWire) {
  int t = 0;
  MockServer server([&](const json& r) { return scripted(r, t); });
  BridgeEnv env(server.address());
  env.reset(1);
  EXPECT_THROW(env.step(Vector::Zero(3)), ShapeError);
  env.step(vec2(0.0, 0.0));
  const auto log = server.received();
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[2]["action"].size(), 2u);
}

TEST(Bridge, ErrorReplyIsProtocolError) {
  MockServer server([](const json& r) {
    if (r["cmd"] == "spec") return kSpec.dump();
    return json{{"error", "step after done"}}.dump();
  });
  BridgeEnv env(server.address());
  EXPECT_THROW(env.reset(0), BridgeProtocolError);
}

TEST(Bridge, MalformedReplyIsProtocolError) {
  MockServer server([](const json& r) {
    if (r["cmd"] == "spec") return kSpec.dump();
    return std::string("{not json");
  });
  BridgeEnv env(server.address());
  EXPECT_THROW(env.reset(0), BridgeProtocolError);
}

TEST(Bridge, MissingSpecFieldIsProtocolError) {
  MockServer server([](const json&) { return json{{"obs_dim", 3}}.dump(); });
  EXPECT_THROW(BridgeEnv env(server.address()), BridgeProtocolError);
}

TEST(Bridge, DimensionMismatchIsDimensionError) {
  MockServer server([](const json& r) {
    if (r["cmd"] == "spec") return kSpec.dump();
    return json{{"state", {1.0, 2.0}}}.dump();
  });
  BridgeEnv env(server.address());
  EXPECT_THROW(env.reset(0), BridgeDimensionError);
}

TEST(Bridge, ServerHangupIsConnectionError) {
  MockServer server([](const json& r) {
    if (r["cmd"] == "spec") return kSpec.dump();
    return std::string();
  });
  BridgeEnv env(server.address());
  EXPECT_THROW(env.reset(0), BridgeConnectionError);
}

TEST(Bridge, RefusedConnection) {
  std::string address;
  {
    asio::io_context io;
    tcp::acceptor a(io, tcp::endpoint(asio::ip::address_v4::loopback(), 0));
    address = "127.0.0.1:" + std::to_string(a.local_endpoint().port());
  }
  EXPECT_THROW(BridgeEnv env(address), BridgeConnectionError);
}

TEST(Bridge, SilentServerTimesOut) {
  MockServer server([](const json& r) {
    if (r["cmd"] == "spec") return kSpec.dump();
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    return std::string();
  });
  BridgeOptions opt;
  opt.timeout = std::chrono::milliseconds(100);
  BridgeEnv env(server.address(), opt);
  EXPECT_THROW(env.reset(0), BridgeConnectionError);
}

TEST(Bridge, ThousandStepLoopback) {
  int t = 0;
  MockServer server([&](const json& r) { return scripted(r, t); });
  BridgeEnv env(server.address());
  env.reset(3);
  for (int i = 0; i < 1000; ++i) {
    const auto r = env.step(vec2(0.1, -0.1));
    ASSERT_EQ(r.next_state[1], static_cast<double>(i + 1));
  }
}

TEST(Bridge, AddressParsing) {
  EXPECT_EQ(parse_bridge_address("localhost:8765"), std::make_pair(std::string("localhost"), std::uint16_t{8765}));
  EXPECT_THROW(parse_bridge_address("localhost"), ConfigError);
  EXPECT_THROW(parse_bridge_address("host:0"), ConfigError);
  EXPECT_THROW(parse_bridge_address("host:70000"), ConfigError);
  EXPECT_THROW(parse_bridge_address("host:12ab"), ConfigError);
}
