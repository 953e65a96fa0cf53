#pragma once

#include <stdexcept>
#include <string>

namespace gfl {

// Numerical failure (diverged sampler, non-finite objective, ...).
// Distinct from std::invalid_argument so callers can map it to a
// different exit status than plain input-validation errors.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gfl
