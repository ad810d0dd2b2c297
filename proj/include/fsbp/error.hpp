#pragma once

#include <stdexcept>
#include <string>

namespace fsbp {

/// Raised on precondition violations and malformed inputs.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fsbp
