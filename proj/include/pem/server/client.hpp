#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pem/core/injector.hpp"

namespace pem::server {

/// Error reply from the server.
class RemoteError : public std::runtime_error {
 public:
  RemoteError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Transport failure (connect, send, receive, unparseable reply).
class ConnectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Blocking client for one session.
class Client {
 public:
  Client(const std::string& host, std::uint16_t port);
  ~Client();
  Client(Client&&) noexcept;
  Client& operator=(Client&&) noexcept;

  /// Sends one raw line and returns the raw reply line.
  std::string request(const std::string& line);

  void init(const std::string& model, std::uint64_t seed, double rate_hz);
  std::vector<CartesianDetection> frame(double t, std::span<const CartesianObject> objects);
  void reset();
  void shutdown();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Request line for a frame, exactly as Client::frame sends it.
std::string frame_request(double t, std::span<const CartesianObject> objects);

}  // namespace pem::server
