#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace pem::server::detail {

inline constexpr std::size_t kMaxLineBytes = std::size_t{64} << 20;

/// Buffered reader of '\n'-terminated lines from a socket.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  /// Next line without its terminator (a trailing '\r' is dropped too);
  /// nullopt on end of stream, error, or an over-long line.
  std::optional<std::string> next();

 private:
  int fd_;
  std::string buffer_;
  std::size_t scanned_ = 0;
};

/// Writes all bytes; false on error.
bool write_all(int fd, std::string_view data);

}  // namespace pem::server::detail
