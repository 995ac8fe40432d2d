#pragma once

#include <stdexcept>
#include <string>

namespace rigidtrack {

// Failure categories surfaced by loaders and pipeline stages. The category
// decides the CLI exit code: input-side problems map to 2, check failures
// to 1.
enum class ErrorKind {
  ingestion,    // missing or unreadable input file
  alignment,    // per-frame collections disagree on frame count
  corruption,   // binary payload has the wrong length or shape
  config,       // malformed manifest / scenario / config document
  propagation,  // box pose missing for a requested frame
  empty_object, // no lidar points for an object in any source frame
  completion,   // depth completion preconditions violated
  import,       // external depth file mismatch
  validation,   // invariant or consistency check failed
  evaluation,   // metric undefined or prediction/gt mismatch
  generation,   // degenerate synthetic scenario
  render,       // frames unavailable for overlay rendering
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rigidtrack
