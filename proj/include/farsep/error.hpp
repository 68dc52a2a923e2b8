#pragma once

#include <stdexcept>
#include <string>

namespace farsep {

enum class ErrorCode {
  Length,
  Shape,
  InvalidArgument,
  DegenerateSteering,
  NoSignal,
  NonConvergence,
  UnsupportedCombination,
  DegenerateTarget,
  DegenerateReference,
  Decomposition,
  SingularDistance,
  Format,
  Io,
  Usage,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace farsep
