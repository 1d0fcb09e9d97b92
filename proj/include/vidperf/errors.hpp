#pragma once

#include <stdexcept>
#include <string>

namespace vidperf {

// Bad user input: malformed config, impossible shape, non-integral channel
// split. The CLI maps this to exit code 1; anything else escaping to main is
// an internal error (exit code 2).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vidperf
