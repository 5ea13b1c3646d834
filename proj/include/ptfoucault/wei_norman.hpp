#pragma once

// Wei-Norman decoupling of the driven-oscillator propagator
//   U(t) = exp(-i f0) exp(-i f1 n) exp(-i f2 a^dag) exp(-i f3 a)
// with
//   f1 = t,
//   f2 = int_0^t F(s) e^{-is} ds,        f3 = int_0^t F*(s) e^{is} ds = conj(f2),
//   f0 = -i int_0^t ds F*(s) e^{is} int_0^s du F(u) e^{-iu}.
// The coefficient ODEs checked by wn_residual are
//   f0' = -i f2 f3',  f1' = 1,  f2' = F e^{-it},  f3' = F* e^{it}.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptfoucault/core_model.hpp"

namespace ptfoucault {

struct WeiNormanCoefficients {
  double t = 0.0;
  cplx f0{};
  cplx f1{};
  cplx f2{};
  cplx f3{};
};

/// Arbitrary drive F(t) for the numerical route.
struct DriveFunction {
  std::function<cplx(double)> F;
  std::string description;

  cplx operator()(double t) const { return F(t); }

  static DriveFunction from_spec(const DriveSpec& drive);
  static DriveFunction zero();
};

/// Closed-form f2 for F = F0 exp(i omega_eff t).
cplx f2_closed_pt(const DriveSpec& drive, double t);

/// f2 alone by adaptive quadrature; the same integral f_numeric uses.
cplx f2_numeric(const DriveFunction& drive, double t, double tol = 1e-10);

/// f2 and f3 by adaptive quadrature, f0 by the nested double integral. f1 = t exactly.
/// Throws QuadratureError (carrying the best estimate) when refinement exhausts its depth.
WeiNormanCoefficients f_numeric(const DriveFunction& drive, double t, double tol = 1e-10);

/// Coefficients on an increasing time grid starting at times[0] = 0, accumulated
/// panel by panel with the same integrands as f_numeric.
std::vector<WeiNormanCoefficients> wn_series(const DriveFunction& drive,
                                             std::span<const double> times, double tol = 1e-12);

/// As wn_series, but f2/f3 from the PT closed form; only f0 is integrated.
std::vector<WeiNormanCoefficients> wn_series_pt(const DriveSpec& drive,
                                                std::span<const double> times,
                                                double tol = 1e-12);

struct ResidualReport {
  double f0 = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  std::size_t points = 0;

  double max() const;
};

/// Max three-point difference residual of each coefficient ODE over interior grid points.
ResidualReport wn_residual(std::span<const WeiNormanCoefficients> coeffs,
                           const DriveFunction& drive);

}  // namespace ptfoucault
