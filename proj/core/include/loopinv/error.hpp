#pragma once

#include <stdexcept>
#include <string>

namespace loopinv {

/// Base class for every error raised by the loopinv libraries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace loopinv
