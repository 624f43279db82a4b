#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "pem/core/injector.hpp"
#include "pem/core/model.hpp"
#include "pem/core/random.hpp"

namespace pem::server {

/// Models a server can hand out, by name. Read-only once serving starts.
using ModelRegistry = std::map<std::string, PemModel, std::less<>>;

inline constexpr std::uint16_t kDefaultPort = 9223;

// error codes carried in {"type": "error", "code": ...}
inline constexpr std::string_view kMalformed = "malformed";
inline constexpr std::string_view kBadRequest = "bad_request";
inline constexpr std::string_view kUnknownModel = "unknown_model";
inline constexpr std::string_view kNotInitialized = "not_initialized";
inline constexpr std::string_view kAlreadyInitialized = "already_initialized";
inline constexpr std::string_view kTimeRegression = "time_regression";
inline constexpr std::string_view kDuplicateId = "duplicate_id";

/// Protocol state of one connection.
///
/// Requests, one JSON document per line:
///   {"type": "init", "model": name, "seed": u64, "rate_hz": x}
///   {"type": "frame", "t": s, "objects": [{"id", "x", "y", "occ"}]}
///   {"type": "reset"}
///   {"type": "shutdown"}
/// Replies: {"type": "response", "t", "objects": [{"source_id", "x", "y"}]}
/// for frames, {"type": "ack", "of": request type} for the others, and
/// {"type": "error", "code", "message"} for anything rejected. Every line gets
/// exactly one reply and a rejected request leaves the state unchanged.
class Session {
 public:
  explicit Session(const ModelRegistry& registry) : registry_(&registry) {}

  /// Reply line (without the trailing newline) for one request line.
  std::string handle_line(std::string_view line);

  bool initialized() const { return model_ != nullptr; }
  bool shutdown_requested() const { return shutdown_; }
  std::uint64_t reset_count() const { return resets_; }
  std::uint64_t frame_count() const { return frames_; }

 private:
  const ModelRegistry* registry_;
  const PemModel* model_ = nullptr;
  std::string model_name_;
  std::uint64_t seed_ = 0;
  double rate_hz_ = 0.0;
  std::uint64_t resets_ = 0;
  std::uint64_t frames_ = 0;
  std::optional<double> last_t_;
  TrackState tracks_;
  Rng rng_{0};
  bool shutdown_ = false;
};

std::string error_line(std::string_view code, std::string_view message);

}  // namespace pem::server
