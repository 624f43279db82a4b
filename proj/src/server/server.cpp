#include "pem/server/server.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include "line_io.hpp"
#include "pem/core/model_io.hpp"

namespace pem::server {

namespace {

std::string errno_text() { return std::strerror(errno); }

}  // namespace

ModelRegistry load_registry(std::span<const std::string> specs) {
  ModelRegistry registry;
  for (const std::string& spec : specs) {
    const auto eq = spec.find('=');
    std::string name;
    std::filesystem::path path;
    if (eq == std::string::npos) {
      path = spec;
      name = path.stem().string();
    } else {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    }
    if (name.empty()) throw ServerError("empty model name in '" + spec + "'");
    if (registry.count(name)) throw ServerError("model name '" + name + "' given twice");
    registry.emplace(name, load_model(path));
  }
  return registry;
}

Server::Server(ModelRegistry registry, const ServerOptions& options) : registry_(std::move(registry)) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(options.port);
  const int rc = ::getaddrinfo(options.host.c_str(), port.c_str(), &hints, &found);
  if (rc != 0) throw ServerError("cannot resolve " + options.host + ": " + ::gai_strerror(rc));

  std::string last_error = "no usable address";
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    const int yes = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_error = errno_text();
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (listen_fd_ < 0) {
    throw ServerError("cannot listen on " + options.host + ":" + port + ": " + last_error);
  }

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                     : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

Server::~Server() {
  stop();
  for (auto& w : workers_) {
    if (w.joinable()) w.join();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::stop() {
  stopping_ = true;
  std::lock_guard lock(mutex_);
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
}

void Server::run() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    std::lock_guard lock(mutex_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    const int yes = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
  stop();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
}

void Server::serve_connection(int fd) {
  Session session(registry_);
  detail::LineReader reader(fd);
  while (auto line = reader.next()) {
    if (line->empty()) continue;
    const std::string reply = session.handle_line(*line) + "\n";
    if (!detail::write_all(fd, reply)) break;
    if (session.shutdown_requested()) {
      stop();
      break;
    }
  }
  std::lock_guard lock(mutex_);
  open_fds_.erase(std::remove(open_fds_.begin(), open_fds_.end(), fd), open_fds_.end());
  ::close(fd);
}

}  // namespace pem::server
