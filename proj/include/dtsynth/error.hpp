#pragma once

#include <stdexcept>
#include <string>

namespace dtsynth {

// Bad user input: malformed config, out-of-range options.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad data: unreadable files, malformed meshes, dimension mismatches.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A broken internal invariant. Reaching this is a bug.
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace dtsynth
