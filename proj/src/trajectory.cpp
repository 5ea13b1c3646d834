#include "ptfoucault/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ptfoucault {

namespace {

void require_regular(double omega_eff) {
  if (is_secular(omega_eff)) {
    throw SecularSingularError(
        "omega_eff = -1 is the secular-singular regime; use secular_limit instead");
  }
}

// Least-squares slope of the unwrapped polar angle of z(t) over the samples.
double fitted_angular_frequency(const LobeAmplitudes& c, double omega_eff, double span) {
  constexpr int kSamples = 4096;
  std::vector<double> ts(kSamples), angles(kSamples);
  double prev = 0.0, offset = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    const double t = span * k / kSamples;
    const double x = c.c1 * std::cos(t) - c.c2 * std::cos(omega_eff * t);
    const double p = -(c.c1 * std::sin(t) + c.c2 * std::sin(omega_eff * t));
    double a = std::atan2(p, x);
    if (k > 0) {
      if (a + offset - prev > kPi) offset -= 2.0 * kPi;
      if (a + offset - prev < -kPi) offset += 2.0 * kPi;
    }
    a += offset;
    ts[k] = t;
    angles[k] = a;
    prev = a;
  }
  const double tm = std::accumulate(ts.begin(), ts.end(), 0.0) / kSamples;
  const double am = std::accumulate(angles.begin(), angles.end(), 0.0) / kSamples;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    num += (ts[k] - tm) * (angles[k] - am);
    den += (ts[k] - tm) * (ts[k] - tm);
  }
  return std::abs(num / den);
}

}  // namespace

bool is_secular(double omega_eff) { return std::abs(omega_eff + 1.0) <= kSecularThreshold; }

LobeAmplitudes lobe_amplitudes(double n0, double F0, double omega_eff) {
  require_regular(omega_eff);
  const double denom = omega_eff + 1.0;
  return {kSqrt2 * (F0 + n0 * denom) / denom, kSqrt2 * F0 / denom};
}

Quadratures quadratures_pt(double n0, double F0, double omega_eff, double t) {
  if (t == 0.0) {
    require_regular(omega_eff);
    return {kSqrt2 * n0, 0.0};
  }
  const auto [c1, c2] = lobe_amplitudes(n0, F0, omega_eff);
  return {c1 * std::cos(t) - c2 * std::cos(omega_eff * t),
          -(c1 * std::sin(t) + c2 * std::sin(omega_eff * t))};
}

Quadratures secular_limit(double n0, double F0, double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {kSqrt2 * (n0 * c - F0 * t * s), -kSqrt2 * (n0 * s + F0 * t * c)};
}

Quadratures resonant_quadratures(double n0, double F0, double t) {
  return {kSqrt2 * n0 * std::cos(t), -kSqrt2 * (n0 + F0) * std::sin(t)};
}

double circular_drive_strength(double n0, double omega_eff) {
  require_regular(omega_eff);
  return -n0 * (omega_eff + 1.0);
}

CircularityResult is_circular(double n0, double F0, double omega_eff, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("is_circular tolerance must be positive");
  const LobeAmplitudes c = lobe_amplitudes(n0, F0, omega_eff);
  const double a1 = std::abs(c.c1);
  const double a2 = std::abs(c.c2);

  // |z| oscillates between ||c1|-|c2|| and |c1|+|c2| within every period 2pi/|1+omega_eff|.
  CircularityResult out;
  const double r0 = std::abs(c.c1 - c.c2);
  out.max_radius_deviation = std::max(a1 + a2 - r0, r0 - std::abs(a1 - a2));
  out.circular = out.max_radius_deviation <= tol;
  if (!out.circular) return out;

  out.radius = std::max(a1, a2);
  if (out.radius == 0.0) return out;
  const auto T = closure_period(omega_eff);
  out.frequency = fitted_angular_frequency(c, omega_eff, T.value_or(2.0 * kPi));
  return out;
}

double closure_period(const Rational& omega_eff) {
  return 2.0 * kPi * static_cast<double>(omega_eff.den);
}

std::optional<double> closure_period(double omega_eff, double tol, std::int64_t max_den) {
  const auto r = rationalize(omega_eff, tol, max_den);
  if (!r) return std::nullopt;
  return closure_period(*r);
}

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::Circle:
      return "CIRCLE";
    case CurveKind::Ellipse:
      return "ELLIPSE";
    case CurveKind::Rose:
      return "ROSE";
    case CurveKind::CardioidLike:
      return "CARDIOID_LIKE";
    case CurveKind::RoundedPolygon:
      return "ROUNDED_POLYGON";
    case CurveKind::Hypocycloid:
      return "HYPOCYCLOID";
    case CurveKind::PentagramClass:
      return "PENTAGRAM_CLASS";
    case CurveKind::FixedPoint:
      return "FIXED_POINT";
    case CurveKind::FixedPositionOscillatingMomentum:
      return "FIXED_POSITION_OSCILLATING_MOMENTUM";
    case CurveKind::SecularUnbounded:
      return "SECULAR_UNBOUNDED";
    case CurveKind::Generic:
      return "GENERIC";
  }
  return "GENERIC";
}

CurveFamily classify(double n0, double F0, double omega_eff, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("classify tolerance must be positive");
  CurveFamily fam;
  fam.ratio = rationalize(omega_eff, tol);

  if (is_secular(omega_eff)) {
    if (F0 != 0.0) {
      fam.kind = CurveKind::SecularUnbounded;
      return fam;
    }
    fam.kind = n0 == 0.0 ? CurveKind::FixedPoint : CurveKind::Circle;
    fam.radius = kSqrt2 * std::abs(n0);
    fam.frequency = fam.radius > 0.0 ? 1.0 : 0.0;
    return fam;
  }

  const LobeAmplitudes c = lobe_amplitudes(n0, F0, omega_eff);
  const double a1 = std::abs(c.c1);
  const double a2 = std::abs(c.c2);
  const double scale = std::max(a1, a2);
  if (scale <= tol) {
    fam.kind = CurveKind::FixedPoint;
    return fam;
  }
  const double eps = tol * scale;

  if (a1 <= eps || a2 <= eps || std::abs(omega_eff) <= tol) {
    fam.kind = CurveKind::Circle;
    if (a1 <= eps) {
      fam.radius = a2;
      fam.frequency = std::abs(omega_eff);
    } else {
      // c2 = 0, or omega_eff = 0 where the c2 term is a fixed offset of the centre.
      fam.radius = a1;
      fam.frequency = 1.0;
    }
    return fam;
  }

  if (std::abs(omega_eff - 1.0) <= tol) {
    fam.semi_axis_x = kSqrt2 * std::abs(n0);
    fam.semi_axis_p = kSqrt2 * std::abs(n0 + F0);
    fam.kind = fam.semi_axis_x <= eps ? CurveKind::FixedPositionOscillatingMomentum
                                      : CurveKind::Ellipse;
    fam.lobes = 2;
    return fam;
  }

  if (fam.ratio) fam.lobes = static_cast<int>(std::abs(fam.ratio->num + fam.ratio->den));

  if (std::abs(a1 - a2) <= eps) {
    if (!fam.ratio) {
      fam.kind = CurveKind::Generic;
    } else {
      fam.kind = fam.ratio->den == 1 ? CurveKind::Rose : CurveKind::PentagramClass;
    }
    return fam;
  }

  // Cusps appear where the two rotating terms cancel the velocity: |c1| = |omega_eff c2|.
  const double cusp_gap = a1 - std::abs(omega_eff) * a2;
  if (omega_eff < 0.0) {
    fam.kind = fam.ratio ? CurveKind::CardioidLike : CurveKind::Generic;
    return fam;
  }
  if (std::abs(cusp_gap) <= eps) {
    fam.kind = CurveKind::Hypocycloid;
    return fam;
  }
  if (fam.ratio && cusp_gap > 0.0) {
    fam.kind = CurveKind::RoundedPolygon;
    return fam;
  }
  fam.kind = CurveKind::Generic;
  return fam;
}

double phase_closed(double F0, double t) { return std::atan(-F0 * std::sin(t)); }

SquareWaveDeviation phase_square_wave_deviation(double F0, std::span<const double> times,
                                                double guard) {
  SquareWaveDeviation out;
  for (double t : times) {
    if (std::abs(std::sin(t)) <= guard) continue;
    out.max_deviation =
        std::max(out.max_deviation, std::abs(std::abs(phase_closed(F0, t)) - 0.5 * kPi));
    ++out.guarded_points;
  }
  return out;
}

Trajectory sample_trajectory(const DriveSpec& drive, const CoherentAmplitude& amplitude,
                             std::span<const double> times, const TrajectoryOptions& options) {
  drive.check();
  const double w = effective_omega(drive);
  const bool secular = is_secular(w);
  if (secular && !options.allow_secular_limit) {
    throw SecularSingularError(
        "omega_eff = -1 (SECULAR_SINGULAR): pass the secular-limit option to sample the limit");
  }
  const bool vacuum_resonant = !secular && std::abs(w - 1.0) <= kResonantThreshold &&
                               amplitude.n0 == 0.0;

  Trajectory traj;
  traj.drive = drive;
  traj.amplitude = amplitude;
  if (!secular) traj.closure_period = closure_period(w);
  traj.points.reserve(times.size());
  for (double t : times) {
    const Quadratures q = secular ? secular_limit(amplitude.n0, drive.F0, t)
                                  : quadratures_pt(amplitude.n0, drive.F0, w, t);
    TrajectoryPoint pt;
    pt.t = t;
    pt.x_mean = q.x;
    pt.p_mean = q.p;
    pt.radius = std::hypot(q.x, q.p);
    pt.theta = vacuum_resonant ? phase_closed(drive.F0, t) : std::atan2(q.p, q.x);
    traj.points.push_back(pt);
  }
  return traj;
}

}  // namespace ptfoucault
