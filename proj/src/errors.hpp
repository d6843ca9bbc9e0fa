#ifndef LAVREG_ERRORS_HPP
#define LAVREG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lavreg {

enum class ErrorCode {
  invalid_argument = 1,
  grid_mismatch = 2,
  singular = 3,
  no_convergence = 4,
  out_of_range = 5,
  unsupported = 6,
  io = 7,
  internal = 8,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace lavreg

#endif
