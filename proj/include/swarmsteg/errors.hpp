#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swarmsteg {

// Base for everything this library throws on bad input or bad data.
// I/O failures are reported separately so callers can map them to
// distinct exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Wire decode failures.
class MalformedLengthError : public DomainError {
 public:
  explicit MalformedLengthError(const std::string& msg) : DomainError(msg) {}
};

class UnsupportedVersionError : public DomainError {
 public:
  explicit UnsupportedVersionError(const std::string& msg) : DomainError(msg) {}
};

class UnknownTypeError : public DomainError {
 public:
  explicit UnknownTypeError(const std::string& msg) : DomainError(msg) {}
};

// Two distinct packets carry the same timestamp, so their send order
// cannot be restored.
class AmbiguousOrderError : public Error {
 public:
  explicit AmbiguousOrderError(const std::string& msg) : Error(msg) {}
};

// A permutation whose rank falls outside the usable codebook.
class OutOfCodebookError : public Error {
 public:
  OutOfCodebookError(const std::string& msg, std::size_t package_index)
      : Error(msg), package_index(package_index) {}
  std::size_t package_index;
};

// A symbol repeated while a package was still accumulating.
class PackageCorruptionError : public Error {
 public:
  PackageCorruptionError(const std::string& msg, std::size_t packet_index)
      : Error(msg), packet_index(packet_index) {}
  std::size_t packet_index;
};

// A cover plan too small to host the requested secret.
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& msg) : Error(msg) {}
};

// A trace line that does not parse; line numbers are 1-based.
class TraceParseError : public Error {
 public:
  TraceParseError(const std::string& msg, std::size_t line)
      : Error(msg), line(line) {}
  std::size_t line;
};

}  // namespace swarmsteg
