#pragma once

// Shared parameter types for the PT-driven harmonic oscillator.
//
// Natural units throughout: hbar = m = omega0 = 1. Time is measured in
// 1/omega0 and every frequency is the ratio omega/omega0. Quadratures follow
//   x = (a + a^dag)/sqrt(2),   p = (a - a^dag)/(i sqrt(2)),
// so a coherent state |alpha> has <x> = sqrt(2) Re(alpha), <p> = sqrt(2) Im(alpha)
// and quadrature variances 1/2.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ptfoucault {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Distance from omega_eff = -1 below which the closed-form lobe amplitudes are singular.
inline constexpr double kSecularThreshold = 1e-9;
/// Distance from omega_eff = +1 below which f2 switches to its resonant limit.
inline constexpr double kResonantThreshold = 1e-9;

enum class DriveFamily { PtComplex, RealCosine };

std::string to_string(DriveFamily family);
DriveFamily drive_family_from_string(const std::string& name);

/// Periodic drive F(t). PtComplex: F0 exp(sign * i omega t). RealCosine: F0 cos(omega t).
struct DriveSpec {
  double F0 = 0.0;
  double omega = 0.0;
  int sign = +1;
  DriveFamily family = DriveFamily::PtComplex;

  /// Throws std::invalid_argument on non-finite values or sign not in {+1, -1}.
  void check() const;
};

/// Real amplitude n0 of the initial coherent state.
struct CoherentAmplitude {
  double n0 = 0.0;
};

struct SimulationGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 1e-3;
  double max_steps = 1e7;

  /// Number of dt-steps needed to cover [t_start, t_end]; the last step may be short.
  std::int64_t step_count() const;
  /// Sample times t_start, t_start + dt, ..., t_end (t_end always included).
  std::vector<double> times() const;
};

double effective_omega(const DriveSpec& drive);
cplx drive_value(const DriveSpec& drive, double t);

enum class DiagnosticCode {
  SecularSingular,
  ResonantLimit,
  GridTooLarge,
  InvalidGrid,
  InvalidDrive,
  InvalidAmplitude,
};

std::string to_string(DiagnosticCode code);

struct Diagnostic {
  DiagnosticCode code;
  bool fatal = false;
  std::string message;
};

struct ValidationReport {
  std::vector<Diagnostic> diagnostics;

  bool ok() const;  // no fatal diagnostics
  bool has(DiagnosticCode code) const;
};

/// Soft checks are reported, hard violations are marked fatal. Inputs are never modified.
ValidationReport validate(const DriveSpec& drive, const CoherentAmplitude& amplitude,
                          const SimulationGrid& grid);

/// Exact rational p/q with q > 0 and gcd(|p|, q) = 1.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t p, std::int64_t q);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

/// Continued-fraction search for p/q with q <= max_den and |x - p/q| <= tol.
std::optional<Rational> rationalize(double x, double tol = 1e-9, std::int64_t max_den = 1000);

}  // namespace ptfoucault
