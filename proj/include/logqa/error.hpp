#pragma once

#include <stdexcept>
#include <string>

namespace logqa {

// Base exception for every recoverable failure in the library. The CLI
// turns these into a one-line diagnostic and a nonzero exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace logqa
