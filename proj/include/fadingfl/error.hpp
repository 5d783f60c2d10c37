#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fadingfl {

/// A numerical routine failed to converge or produced non-finite values.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration document was malformed or contained unknown keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A binary dataset file could not be decoded.
class ParseError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated, count_mismatch, bad_value, io };

  ParseError(Kind kind, std::uint64_t offset, const std::string& message)
      : std::runtime_error(message), kind_(kind), offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  /// Byte offset at which decoding stopped.
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

}  // namespace fadingfl
