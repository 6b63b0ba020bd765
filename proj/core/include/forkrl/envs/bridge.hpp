#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>

#include "forkrl/envs/environment.hpp"
#include "forkrl/errors.hpp"

namespace forkrl::envs {

// Socket-level failure: refused, reset, closed mid-message, timed out.
class BridgeConnectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The server sent something that is not a valid reply, or an error reply.
class BridgeProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A reply disagrees with the dimensions the server declared.
class BridgeDimensionError : public ShapeError {
 public:
  using ShapeError::ShapeError;
};

struct BridgeOptions {
  std::chrono::milliseconds timeout{30'000};
};

/// Client for an environment served over TCP as newline-delimited JSON.
///
/// The connection is opened and the spec fetched in the constructor.
/// Actions are validated locally, so a wrong-sized action never reaches the
/// wire. The remote state cannot be checkpointed.
class BridgeEnv final : public Environment {
 public:
  // address is "host:port".
  explicit BridgeEnv(const std::string& address, BridgeOptions options = {});
  ~BridgeEnv() override;

  std::string name() const override { return "bridge"; }
  bool supports_snapshot() const override { return false; }
  const std::string& address() const { return address_; }

 protected:
  Vector do_reset(std::uint64_t seed) override;
  StepResult do_step(const Vector& action) override;

 private:
  struct Connection;
  std::string address_;
  std::unique_ptr<Connection> conn_;
};

// Splits "host:port"; throws ConfigError on malformed input.
std::pair<std::string, std::uint16_t> parse_bridge_address(const std::string& address);

}  // namespace forkrl::envs
