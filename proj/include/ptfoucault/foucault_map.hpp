#pragma once

// Duality between PT-driven oscillator orbits and hypotrochoids (the planar
// paths of a Foucault pendulum).
//
// A hypotrochoid with fixed radius R, rolling radius r and pen offset d is
//   z(theta) = (R - r) e^{i theta} + d e^{-i theta (R - r)/r}.
// The oscillator parameters map onto it through
//   r = n0 + (F0 + n0)/omega,  R = (omega + 1)(F0 + n0 (omega + 1))/omega,  d = F0,
// and the two curves coincide up to a similarity transform.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ptfoucault/core_model.hpp"

namespace ptfoucault {

inline constexpr double kDegenerateRadius = 1e-12;

struct HypotrochoidParams {
  double R = 0.0;
  double r = 0.0;
  double d = 0.0;

  bool degenerate() const;  // |r| or |R| below kDegenerateRadius
  bool rolling_degenerate() const { return std::abs(r) <= kDegenerateRadius; }
};

struct OscillatorParams {
  double n0 = 0.0;
  double F0 = 0.0;
  double omega = 0.0;
};

/// Closed curve sampled uniformly over one period of its parameter (endpoint excluded).
struct PlanarCurve {
  std::vector<double> parameter;
  std::vector<cplx> points;  // (x, y) as x + i y
  double period = 0.0;
  bool closed = true;
};

struct SimilarityFit {
  double scale = 1.0;
  double rotation = 0.0;  // radians in (-pi, pi]
  bool reflection = false;
  double parameter_shift = 0.0;  // fraction of the period, in [0, 1)
  cplx translation{};
  double residual = 0.0;  // symmetric Hausdorff distance / larger diameter
};

struct InverseMapResult {
  bool mappable = false;
  std::vector<OscillatorParams> solutions;  // sorted by |omega|
  std::string reason;
  std::string candidate_family;
};

struct DualityReport {
  OscillatorParams params;
  HypotrochoidParams hypotrochoid;
  SimilarityFit fit;
  double expected_scale = 0.0;  // sqrt2 / (omega + 1); sign absorbed by a pi rotation
  bool scale_matches = false;   // |fit.scale - |expected_scale|| <= 1e-6 relative
  double tolerance = 1e-6;
  bool pass = false;
};

HypotrochoidParams to_hypotrochoid(double n0, double F0, double omega);
InverseMapResult from_hypotrochoid(const HypotrochoidParams& params);

struct CurveOptions {
  int samples = 4096;
  double fallback_span = 40.0 * kPi;  // used when (R - r)/r has no small rational form
};

PlanarCurve hypotrochoid_curve(const HypotrochoidParams& params, const CurveOptions& options = {});

/// Closed-form oscillator orbit over its own shortest period.
PlanarCurve trajectory_curve(double n0, double F0, double omega_eff,
                             const CurveOptions& options = {});

/// Finds s, phi, reflection, translation and parameter shift that carry a onto b.
SimilarityFit similarity_match(const PlanarCurve& a, const PlanarCurve& b);

/// Symmetric Hausdorff distance between the trigonometric interpolants of two closed curves.
double hausdorff_distance(const PlanarCurve& a, const PlanarCurve& b);
double curve_diameter(const PlanarCurve& c);

DualityReport verify_duality(double n0, double F0, double omega, double tolerance = 1e-6,
                             const CurveOptions& options = {});

}  // namespace ptfoucault
