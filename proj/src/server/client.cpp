#include "pem/server/client.hpp"

#include <cerrno>
#include <cstring>

#include <json.hpp>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include "line_io.hpp"

namespace pem::server {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

struct Client::Impl {
  int fd = -1;
  detail::LineReader reader{-1};

  ~Impl() {
    if (fd >= 0) ::close(fd);
  }
};

Client::Client(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_NUMERICSERV;
  addrinfo* found = nullptr;
  const std::string service = std::to_string(port);
  const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found);
  if (rc != 0) throw ConnectionError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  std::string last_error = "no usable address";
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      impl_->fd = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (impl_->fd < 0) throw ConnectionError("cannot connect to " + host + ":" + service + ": " + last_error);
  const int yes = 1;
  ::setsockopt(impl_->fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
  impl_->reader = detail::LineReader(impl_->fd);
}

Client::~Client() = default;
Client::Client(Client&&) noexcept = default;
Client& Client::operator=(Client&&) noexcept = default;

std::string Client::request(const std::string& line) {
  if (!detail::write_all(impl_->fd, line + "\n")) throw ConnectionError("send failed");
  auto reply = impl_->reader.next();
  if (!reply) throw ConnectionError("connection closed before reply");
  return *reply;
}

namespace {

json checked_reply(const std::string& line, const char* expected_type) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::parse_error&) {
    throw ConnectionError("unparseable reply: " + line);
  }
  const std::string type = reply.value("type", "");
  if (type == "error") throw RemoteError(reply.value("code", ""), reply.value("message", ""));
  if (type != expected_type) throw ConnectionError("unexpected reply: " + line);
  return reply;
}

}  // namespace

void Client::init(const std::string& model, std::uint64_t seed, double rate_hz) {
  ojson req;
  req["type"] = "init";
  req["model"] = model;
  req["seed"] = seed;
  req["rate_hz"] = rate_hz;
  checked_reply(request(req.dump()), "ack");
}

std::string frame_request(double t, std::span<const CartesianObject> objects) {
  ojson req;
  req["type"] = "frame";
  req["t"] = t;
  req["objects"] = ojson::array();
  for (const auto& o : objects) {
    ojson j;
    j["id"] = o.id;
    j["x"] = o.position.x;
    j["y"] = o.position.y;
    j["occ"] = static_cast<int>(o.occlusion);
    req["objects"].push_back(std::move(j));
  }
  return req.dump();
}

std::vector<CartesianDetection> Client::frame(double t, std::span<const CartesianObject> objects) {
  const json reply = checked_reply(request(frame_request(t, objects)), "response");
  std::vector<CartesianDetection> out;
  try {
    for (const auto& o : reply.at("objects")) {
      out.push_back({o.at("source_id").get<ObjectId>(), {o.at("x").get<double>(), o.at("y").get<double>()}});
    }
  } catch (const json::exception& e) {
    throw ConnectionError(std::string("malformed response: ") + e.what());
  }
  return out;
}

void Client::reset() { checked_reply(request(R"({"type":"reset"})"), "ack"); }

void Client::shutdown() { checked_reply(request(R"({"type":"shutdown"})"), "ack"); }

}  // namespace pem::server
