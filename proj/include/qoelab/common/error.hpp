#pragma once

#include <stdexcept>
#include <string>

namespace qoelab {

// Invalid parameters, profiles, matrix files. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed wire data.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed artifact names and text records.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Socket and substrate failures. Maps to CLI exit code 2.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qoelab
