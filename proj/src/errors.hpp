#pragma once

#include <stdexcept>
#include <string>

namespace vallois {

// Stable error categories, mirrored one-to-one by the C API status codes.
enum class Errc {
  invalid_argument = 1,
  parse = 2,
  domain = 3,
  validation = 4,
  numeric = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), code_(code), name_(std::move(name)) {}

  Errc code() const { return code_; }
  const std::string& name() const { return name_; }

 private:
  Errc code_;
  std::string name_;  // e.g. "GammaDivergence", "DomainExceeded"
};

}  // namespace vallois
