#pragma once

#include <stdexcept>

namespace still {

/// File and format problems (CLI exit code 1).
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad parameters or degenerate data (CLI exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Too little data for the requested computation (CLI exit code 3).
struct insufficient_data : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace still
