#pragma once

#include <stdexcept>
#include <string>

namespace shearblob {

// Bad input: malformed config, violated precondition, unreadable file.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// The integration itself failed (wall crossing, velocity blow-up).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shearblob
