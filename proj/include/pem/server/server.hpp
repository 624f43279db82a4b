#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pem/server/session.hpp"

namespace pem::server {

class ServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads models from "name=path" entries or plain paths (named after the
/// file stem). Throws ServerError on duplicate names, ModelError or
/// std::runtime_error on unreadable files.
ModelRegistry load_registry(std::span<const std::string> specs);

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;  ///< 0 picks a free port
};

/// TCP front end: one thread and one Session per connection. A shutdown
/// request on any connection stops the whole server.
class Server {
 public:
  /// Binds and listens immediately; throws ServerError when that fails.
  Server(ModelRegistry registry, const ServerOptions& options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }

  /// Accepts connections until stop() or a shutdown request, then closes
  /// every open connection and joins their threads.
  void run();

  /// Safe from any thread, including signal-free shutdown from tests.
  void stop();

  const ModelRegistry& registry() const { return registry_; }

 private:
  void serve_connection(int fd);

  ModelRegistry registry_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::vector<int> open_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace pem::server
