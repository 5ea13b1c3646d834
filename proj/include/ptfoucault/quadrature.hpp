#pragma once

#include <complex>
#include <functional>
#include <stdexcept>

namespace ptfoucault {

struct QuadratureResult {
  std::complex<double> value;
  double error_estimate = 0.0;
  long evaluations = 0;
};

/// Raised when some subinterval hit the depth cap before meeting its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, QuadratureResult best)
      : std::runtime_error(what), best_(best) {}
  const QuadratureResult& best_estimate() const { return best_; }

 private:
  QuadratureResult best_;
};

struct SimpsonOptions {
  int max_depth = 48;
  /// Initial uniform panels per unit length; guards oscillatory integrands
  /// against a false early convergence on the first Simpson estimate.
  double panels_per_unit = 2.0;
};

/// Adaptive Simpson with Richardson extrapolation for complex integrands.
/// tol is an absolute bound on the total error estimate. Panels whose Simpson
/// difference is already at the round-off level of the integrand stop refining,
/// so a tol below what double precision can resolve does not exhaust the depth cap.
QuadratureResult adaptive_simpson(const std::function<std::complex<double>(double)>& f, double a,
                                  double b, double tol, const SimpsonOptions& options = {});

}  // namespace ptfoucault
