#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ssq {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;   // complex amplitude vector (states live here)
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

// State vectors over a Dicke (or product Dicke) basis are plain complex
// vectors; unit norm is a contract of the producing operation, not a type.
using StateVector = Vec;

enum class ErrorCode {
  invalid_argument = 2,   // bad config / preconditions
  budget = 3,             // resource estimate exceeds the configured cap
  numerical = 4,          // accuracy failure, non-convergence, degeneracy
  io = 5,
  not_bracketed = 6,      // minimum sits on the trace boundary
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

}  // namespace ssq
