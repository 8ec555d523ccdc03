#pragma once

#include <stdexcept>
#include <string>

namespace hwl {

enum class ErrorCode {
  ok = 0,
  invalid_argument = 1,
  invalid_index = 2,
  model_mismatch = 3,
  domain = 4,
  capacity = 5,
  convergence = 6,
  configuration = 7,
  io = 8,
  stencil = 9,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by spectral_norm when the iteration cap is hit; carries the last
// Rayleigh-quotient estimate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate)
      : Error(ErrorCode::convergence, what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

}  // namespace hwl
