#pragma once

// Closed-form Wigner-space trajectories of a coherent state |n0> under
// F(t) = F0 exp(i omega_eff t):
//
//   <x(t)> = c1 cos t - c2 cos(omega_eff t)
//   <p(t)> = -(c1 sin t + c2 sin(omega_eff t))
//   c1 = sqrt2 (F0 + n0 (omega_eff + 1)) / (omega_eff + 1),  c2 = sqrt2 F0 / (omega_eff + 1)
//
// In complex form z = x + i p = c1 e^{-it} - c2 e^{i omega_eff t}, hence
//   |z|^2 = c1^2 + c2^2 - 2 c1 c2 cos((1 + omega_eff) t).

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptfoucault/core_model.hpp"

namespace ptfoucault {

/// Thrown when a closed form is asked for inside the omega_eff = -1 secular regime.
class SecularSingularError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Quadratures {
  double x = 0.0;
  double p = 0.0;
};

struct TrajectoryPoint {
  double t = 0.0;
  double x_mean = 0.0;
  double p_mean = 0.0;
  double var_x = 0.5;
  double var_p = 0.5;
  double radius = 0.0;
  double theta = 0.0;
};

struct Trajectory {
  DriveSpec drive;
  CoherentAmplitude amplitude;
  std::vector<TrajectoryPoint> points;
  std::optional<double> closure_period;
};

struct LobeAmplitudes {
  double c1 = 0.0;
  double c2 = 0.0;
};

bool is_secular(double omega_eff);

LobeAmplitudes lobe_amplitudes(double n0, double F0, double omega_eff);
Quadratures quadratures_pt(double n0, double F0, double omega_eff, double t);
/// omega_eff = -1 limit: linear-in-t growth from the counter-rotating resonance.
Quadratures secular_limit(double n0, double F0, double t);
/// Closed form at omega_eff = +1.
Quadratures resonant_quadratures(double n0, double F0, double t);

/// Drive strength that cancels the e^{-it} lobe: F0 = -n0 (omega_eff + 1).
double circular_drive_strength(double n0, double omega_eff);

struct CircularityResult {
  bool circular = false;
  double max_radius_deviation = 0.0;
  double radius = 0.0;     // fitted mean radius
  double frequency = 0.0;  // fitted |d(angle)/dt|
};

CircularityResult is_circular(double n0, double F0, double omega_eff, double tol = 1e-9);

/// Smallest T > 0 with z(T) = z(0) for generic amplitudes: 2 pi q for omega_eff = p/q.
double closure_period(const Rational& omega_eff);
/// Rationalizes omega_eff first; nullopt means no finite closure was found.
std::optional<double> closure_period(double omega_eff, double tol = 1e-9,
                                     std::int64_t max_den = 1000);

enum class CurveKind {
  Circle,
  Ellipse,
  Rose,
  CardioidLike,
  RoundedPolygon,
  Hypocycloid,
  PentagramClass,
  FixedPoint,
  FixedPositionOscillatingMomentum,
  SecularUnbounded,
  Generic,
};

std::string to_string(CurveKind kind);

struct CurveFamily {
  CurveKind kind = CurveKind::Generic;
  double radius = 0.0;            // Circle
  double frequency = 0.0;         // Circle: angular frequency of the orbit
  double semi_axis_x = 0.0;       // Ellipse / FixedPosition...
  double semi_axis_p = 0.0;
  int lobes = 0;                  // rotational symmetry order for rational omega_eff
  std::optional<Rational> ratio;  // omega_eff as p/q when rational
};

/// Deterministic decision tree on (c1, c2, omega_eff); tol is relative to max(|c1|, |c2|).
CurveFamily classify(double n0, double F0, double omega_eff, double tol = 1e-9);

/// Closed-form Pegg-Barnett phase of the resonant vacuum mode.
double phase_closed(double F0, double t);

struct SquareWaveDeviation {
  double max_deviation = 0.0;
  std::size_t guarded_points = 0;
};

/// max over the guarded grid (|sin t| > guard) of ||phase_closed| - pi/2|.
SquareWaveDeviation phase_square_wave_deviation(double F0, std::span<const double> times,
                                                double guard = 0.1);

struct TrajectoryOptions {
  bool allow_secular_limit = false;
};

/// Samples the closed form on the given times. theta is atan2(p, x).
Trajectory sample_trajectory(const DriveSpec& drive, const CoherentAmplitude& amplitude,
                             std::span<const double> times, const TrajectoryOptions& options = {});

}  // namespace ptfoucault
