#include "forkrl/envs/bridge.hpp"

#include <sys/socket.h>
#include <sys/time.h>

#include <boost/asio.hpp>
#include <nlohmann/json.hpp>

namespace forkrl::envs {

namespace asio = boost::asio;
using asio::ip::tcp;
using nlohmann::json;

struct BridgeEnv::Connection {
  asio::io_context io;
  tcp::socket socket{io};
  asio::streambuf inbox;

  void send(const json& message) {
    const std::string line = message.dump() + "\n";
    boost::system::error_code ec;
    asio::write(socket, asio::buffer(line), ec);
    if (ec) throw BridgeConnectionError("bridge: send failed: " + ec.message());
  }

  json receive() {
    boost::system::error_code ec;
    asio::read_until(socket, inbox, '\n', ec);
    if (ec) throw BridgeConnectionError("bridge: receive failed: " + ec.message());
    std::istream in(&inbox);
    std::string line;
    std::getline(in, line);
    json reply;
    try {
      reply = json::parse(line);
    } catch (const json::parse_error& e) {
      throw BridgeProtocolError(std::string("bridge: malformed reply: ") + e.what());
    }
    if (!reply.is_object()) throw BridgeProtocolError("bridge: reply is not a JSON object");
    if (reply.contains("error")) {
      throw BridgeProtocolError("bridge: server error: " + reply["error"].dump());
    }
    return reply;
  }

  json request(const json& message) {
    send(message);
    return receive();
  }
};

namespace {

const json& field(const json& reply, const char* key) {
  auto it = reply.find(key);
  if (it == reply.end()) throw BridgeProtocolError(std::string("bridge: reply lacks '") + key + "'");
  return *it;
}

double number(const json& reply, const char* key) {
  const auto& v = field(reply, key);
  if (!v.is_number()) throw BridgeProtocolError(std::string("bridge: '") + key + "' is not a number");
  return v.get<double>();
}

bool flag(const json& reply, const char* key, bool fallback) {
  auto it = reply.find(key);
  if (it == reply.end()) return fallback;
  if (!it->is_boolean()) throw BridgeProtocolError(std::string("bridge: '") + key + "' is not a bool");
  return it->get<bool>();
}

std::size_t count(const json& reply, const char* key) {
  const double v = number(reply, key);
  if (v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw BridgeProtocolError(std::string("bridge: '") + key + "' must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

Vector vector_field(const json& reply, const char* key, std::size_t dim) {
  const auto& v = field(reply, key);
  if (!v.is_array()) throw BridgeProtocolError(std::string("bridge: '") + key + "' is not an array");
  if (v.size() != dim) {
    throw BridgeDimensionError(std::string("bridge: '") + key + "' has " + std::to_string(v.size()) +
                               " entries, declared " + std::to_string(dim));
  }
  Vector out(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    if (!v[i].is_number()) {
      throw BridgeProtocolError(std::string("bridge: '") + key + "' holds a non-number");
    }
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

void set_timeout(tcp::socket& socket, std::chrono::milliseconds timeout) {
  if (timeout.count() <= 0) return;
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(socket.native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(socket.native_handle(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

EnvSpec placeholder_spec() {
  EnvSpec s;
  s.obs_dim = 1;
  s.act_dim = 1;
  s.action_low = Vector::Constant(1, -1.0);
  s.action_high = Vector::Constant(1, 1.0);
  s.max_episode_steps = 1;
  return s;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_bridge_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw ConfigError("bridge address must be host:port, got '" + address + "'");
  }
  const std::string host = address.substr(0, colon);
  const std::string port_text = address.substr(colon + 1);
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ConfigError("bridge address has an invalid port: '" + port_text + "'");
  }
  if (port == 0 || port > 65535) throw ConfigError("bridge port out of range: " + port_text);
  return {host, static_cast<std::uint16_t>(port)};
}

BridgeEnv::BridgeEnv(const std::string& address, BridgeOptions options)
    : Environment(placeholder_spec()), address_(address), conn_(std::make_unique<Connection>()) {
  const auto [host, port] = parse_bridge_address(address);
  boost::system::error_code ec;
  tcp::resolver resolver(conn_->io);
  auto endpoints = resolver.resolve(host, std::to_string(port), ec);
  if (ec) throw BridgeConnectionError("bridge: cannot resolve " + address + ": " + ec.message());
  asio::connect(conn_->socket, endpoints, ec);
  if (ec) throw BridgeConnectionError("bridge: cannot connect to " + address + ": " + ec.message());
  conn_->socket.set_option(tcp::no_delay(true));
  set_timeout(conn_->socket, options.timeout);

  const json reply = conn_->request({{"cmd", "spec"}});
  EnvSpec s;
  s.obs_dim = count(reply, "obs_dim");
  s.act_dim = count(reply, "act_dim");
  s.action_low = vector_field(reply, "action_low", s.act_dim);
  s.action_high = vector_field(reply, "action_high", s.act_dim);
  if (reply.contains("obs_low") && reply.contains("obs_high")) {
    s.obs_low = vector_field(reply, "obs_low", s.obs_dim);
    s.obs_high = vector_field(reply, "obs_high", s.obs_dim);
  }
  s.max_episode_steps = count(reply, "max_steps");
  try {
    set_spec(std::move(s));
  } catch (const ShapeError& e) {
    throw BridgeProtocolError(std::string("bridge: invalid spec: ") + e.what());
  }
}

BridgeEnv::~BridgeEnv() {
  if (!conn_ || !conn_->socket.is_open()) return;
  try {
    conn_->send({{"cmd", "close"}});
  } catch (...) {
    // The server may already be gone.
  }
  boost::system::error_code ec;
  conn_->socket.shutdown(tcp::socket::shutdown_both, ec);
  conn_->socket.close(ec);
}

Vector BridgeEnv::do_reset(std::uint64_t seed) {
  // Numbers travel as doubles and gym seeds are 32-bit; fold the seed so it survives both.
  const auto folded = static_cast<std::uint32_t>(seed ^ (seed >> 32));
  const json reply = conn_->request({{"cmd", "reset"}, {"seed", static_cast<double>(folded)}});
  return vector_field(reply, "state", spec().obs_dim);
}

StepResult BridgeEnv::do_step(const Vector& action) {
  std::vector<double> a(action.data(), action.data() + action.size());
  const json reply = conn_->request({{"cmd", "step"}, {"action", a}});
  StepResult r;
  r.next_state = vector_field(reply, "state", spec().obs_dim);
  r.reward = number(reply, "reward");
  r.done = flag(reply, "done", false);
  r.done_is_timeout = r.done && flag(reply, "timeout", false);
  r.info["fell_down"] = flag(reply, "fell_down", false);
  return r;
}

}  // namespace forkrl::envs
