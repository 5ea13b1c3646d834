#include "ptfoucault/foucault_map.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <unsupported/Eigen/FFT>

#include "ptfoucault/trajectory.hpp"

namespace ptfoucault {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kPruneRelative = 1e-13;

// Band-limited interpolant z(s) = sum_k c_k e^{iks}, s in [0, 2pi), of a uniformly sampled closed curve.
struct TrigSeries {
  std::vector<int> harmonics;
  std::vector<cplx> coeffs;
  cplx mean{};

  cplx operator()(double s) const {
    cplx z = mean;
    for (std::size_t j = 0; j < harmonics.size(); ++j) {
      const double ph = harmonics[j] * s;
      z += coeffs[j] * cplx{std::cos(ph), std::sin(ph)};
    }
    return z;
  }

  cplx coefficient(int k) const {
    if (k == 0) return mean;
    for (std::size_t j = 0; j < harmonics.size(); ++j) {
      if (harmonics[j] == k) return coeffs[j];
    }
    return {};
  }

  double power() const {
    double p = 0.0;
    for (const auto& c : coeffs) p += std::norm(c);
    return p;
  }
};

void require_closed(const PlanarCurve& c, const char* what) {
  if (!c.closed) throw std::invalid_argument(std::string(what) + ": curve is not closed");
  if (c.points.size() < 8) throw std::invalid_argument(std::string(what) + ": fewer than 8 samples");
  for (const auto& z : c.points) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument(std::string(what) + ": non-finite sample");
    }
  }
}

TrigSeries fourier_series(const PlanarCurve& c) {
  const auto n = static_cast<int>(c.points.size());
  Eigen::FFT<double> fft;
  std::vector<cplx> spectrum;
  fft.fwd(spectrum, c.points);

  std::vector<cplx> full(n);
  double peak = 0.0;
  for (int k = 0; k < n; ++k) {
    full[k] = spectrum[k] / static_cast<double>(n);
    if (k != 0) peak = std::max(peak, std::abs(full[k]));
  }

  TrigSeries s;
  s.mean = full[0];
  const double floor = kPruneRelative * peak;
  auto push = [&](int k, cplx value) {
    if (std::abs(value) > floor) {
      s.harmonics.push_back(k);
      s.coeffs.push_back(value);
    }
  };
  for (int k = 1; k < n; ++k) {
    if (2 * k == n) {
      // Nyquist term split evenly between +-n/2.
      push(k, 0.5 * full[k]);
      push(-k, 0.5 * full[k]);
    } else {
      push(2 * k < n ? k : k - n, full[k]);
    }
  }
  return s;
}

TrigSeries reflect(const TrigSeries& s) {
  TrigSeries r;
  r.mean = std::conj(s.mean);
  for (std::size_t j = 0; j < s.harmonics.size(); ++j) {
    r.harmonics.push_back(-s.harmonics[j]);
    r.coeffs.push_back(std::conj(s.coeffs[j]));
  }
  return r;
}

// Correlation sum_k conj(A_k) B_k e^{-ik tau} over shared non-zero harmonics.
struct Correlation {
  std::vector<int> harmonics;
  std::vector<cplx> products;

  cplx operator()(double tau) const {
    cplx acc{};
    for (std::size_t j = 0; j < harmonics.size(); ++j) {
      const double ph = -harmonics[j] * tau;
      acc += products[j] * cplx{std::cos(ph), std::sin(ph)};
    }
    return acc;
  }
};

Correlation correlate(const TrigSeries& a, const TrigSeries& b) {
  Correlation c;
  for (std::size_t j = 0; j < a.harmonics.size(); ++j) {
    const cplx bk = b.coefficient(a.harmonics[j]);
    if (bk == cplx{}) continue;
    c.harmonics.push_back(a.harmonics[j]);
    c.products.push_back(std::conj(a.coeffs[j]) * bk);
  }
  return c;
}

struct ShiftFit {
  double tau = 0.0;
  cplx w{};
  double mismatch = std::numeric_limits<double>::infinity();
};

ShiftFit best_shift(const TrigSeries& a, const TrigSeries& b) {
  const double pa = a.power();
  const double pb = b.power();
  ShiftFit fit;
  const Correlation corr = correlate(a, b);
  if (corr.harmonics.empty()) {
    fit.w = {};
    fit.mismatch = pb;
    return fit;
  }

  int kmax = 1;
  for (int k : corr.harmonics) kmax = std::max(kmax, std::abs(k));
  const int grid = std::clamp(16 * kmax, 64, 1 << 16);
  std::vector<double> g(grid);
  for (int i = 0; i < grid; ++i) g[i] = std::norm(corr(kTwoPi * i / grid));

  // Refine the few best grid maxima; the correlation is a trigonometric polynomial.
  std::vector<int> order(grid);
  for (int i = 0; i < grid; ++i) order[i] = i;
  const int candidates = std::min(grid, 6);
  std::partial_sort(order.begin(), order.begin() + candidates, order.end(),
                    [&](int x, int y) { return g[x] > g[y]; });

  const double h = kTwoPi / grid;
  double best_tau = 0.0;
  double best_val = -1.0;
  for (int c = 0; c < candidates; ++c) {
    const double centre = kTwoPi * order[c] / grid;
    const auto neg = [&](double tau) { return -std::norm(corr(tau)); };
    const auto [tau, val] = boost::math::tools::brent_find_minima(neg, centre - h, centre + h, 52);
    if (-val > best_val) {
      best_val = -val;
      best_tau = tau;
    }
  }
  best_tau = std::fmod(best_tau, kTwoPi);
  if (best_tau < 0.0) best_tau += kTwoPi;

  fit.tau = best_tau;
  fit.w = corr(best_tau) / pa;
  fit.mismatch = std::max(0.0, pb - best_val / pa);
  return fit;
}

TrigSeries transform(const TrigSeries& a, const ShiftFit& fit, cplx target_mean) {
  TrigSeries t;
  t.mean = target_mean;
  for (std::size_t j = 0; j < a.harmonics.size(); ++j) {
    const double ph = a.harmonics[j] * fit.tau;
    t.harmonics.push_back(a.harmonics[j]);
    t.coeffs.push_back(fit.w * a.coeffs[j] * cplx{std::cos(ph), std::sin(ph)});
  }
  return t;
}

// max_i min_s |p(s_i) - q(s)| with p sampled on np points, q searched on nq points then refined.
double directed_distance(const TrigSeries& p, int np, const TrigSeries& q, int nq,
                         double floor) {
  std::vector<cplx> qgrid(nq);
  for (int j = 0; j < nq; ++j) qgrid[j] = q(kTwoPi * j / nq);
  const double hq = kTwoPi / nq;

  double worst = 0.0;
  for (int i = 0; i < np; ++i) {
    const cplx pt = p(kTwoPi * i / np);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < nq; ++j) {
      const double d = std::norm(qgrid[j] - pt);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    double dist = std::sqrt(best_d);
    if (dist > floor) {
      const double centre = kTwoPi * best / nq;
      const auto f = [&](double s) { return std::norm(q(s) - pt); };
      const auto res = boost::math::tools::brent_find_minima(f, centre - hq, centre + hq, 52);
      dist = std::min(dist, std::sqrt(res.second));
    }
    worst = std::max(worst, dist);
  }
  return worst;
}

double diameter_of(const std::vector<cplx>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, std::norm(pts[i] - pts[j]));
  }
  return std::sqrt(best);
}

PlanarCurve sample_uniform(double period, int samples, bool closed,
                           const std::function<cplx(double)>& z) {
  if (samples < 8) throw std::invalid_argument("curves need at least 8 samples");
  PlanarCurve c;
  c.period = period;
  c.closed = closed;
  c.parameter.resize(samples);
  c.points.resize(samples);
  for (int j = 0; j < samples; ++j) {
    const double s = period * j / samples;
    c.parameter[j] = s;
    c.points[j] = z(s);
  }
  return c;
}

}  // namespace

bool HypotrochoidParams::degenerate() const {
  return std::abs(r) <= kDegenerateRadius || std::abs(R) <= kDegenerateRadius;
}

HypotrochoidParams to_hypotrochoid(double n0, double F0, double omega) {
  if (omega == 0.0) throw std::domain_error("hypotrochoid map is undefined for omega = 0");
  HypotrochoidParams h;
  h.r = n0 + (F0 + n0) / omega;
  h.R = (omega + 1.0) * (F0 + n0 * (omega + 1.0)) / omega;
  h.d = F0;
  return h;
}

InverseMapResult from_hypotrochoid(const HypotrochoidParams& params) {
  InverseMapResult out;
  if (!std::isfinite(params.R) || !std::isfinite(params.r) || !std::isfinite(params.d)) {
    out.reason = "non-finite hypotrochoid parameters";
    return out;
  }
  if (params.rolling_degenerate()) {
    out.reason = "rolling radius r = 0: the curve is a circle of radius |d|";
    out.candidate_family = "circle, use circular_drive_strength";
    return out;
  }
  // Eliminating n0 leaves R = (omega + 1) r, which is linear in omega.
  const double omega = params.R / params.r - 1.0;
  if (std::abs(omega) <= kDegenerateRadius) {
    out.reason = "R = r implies omega = 0, outside the map's domain";
    return out;
  }
  if (is_secular(omega)) {
    out.reason = "R = 0 implies omega = -1, the secular-singular regime";
    out.candidate_family = "secular, use secular_limit";
    return out;
  }
  OscillatorParams sol;
  sol.omega = omega;
  sol.F0 = params.d;
  sol.n0 = (params.r * omega - params.d) / (omega + 1.0);

  const HypotrochoidParams back = to_hypotrochoid(sol.n0, sol.F0, sol.omega);
  const double scale = std::max({std::abs(params.R), std::abs(params.r), std::abs(params.d), 1e-300});
  const double err = std::max({std::abs(back.R - params.R), std::abs(back.r - params.r),
                               std::abs(back.d - params.d)}) / scale;
  if (err > 1e-9) {
    out.reason = "inverse solution failed the round-trip check";
    return out;
  }
  out.mappable = true;
  out.solutions.push_back(sol);
  return out;
}

PlanarCurve hypotrochoid_curve(const HypotrochoidParams& params, const CurveOptions& options) {
  if (!std::isfinite(params.R) || !std::isfinite(params.r) || !std::isfinite(params.d)) {
    throw std::invalid_argument("hypotrochoid parameters must be finite");
  }
  if (params.rolling_degenerate()) {
    const double d = params.d;
    return sample_uniform(kTwoPi, options.samples, true,
                          [d](double s) { return d * cplx{std::cos(s), std::sin(s)}; });
  }
  const double outer = params.R - params.r;
  const double ratio = outer / params.r;
  const auto exact = rationalize(ratio, 1e-12, 1000);
  const double k = exact ? exact->value() : ratio;
  const double period = exact ? kTwoPi * static_cast<double>(exact->den) : options.fallback_span;
  const double d = params.d;
  return sample_uniform(period, options.samples, exact.has_value(), [=](double s) {
    return outer * cplx{std::cos(s), std::sin(s)} + d * cplx{std::cos(k * s), -std::sin(k * s)};
  });
}

PlanarCurve trajectory_curve(double n0, double F0, double omega_eff, const CurveOptions& options) {
  const LobeAmplitudes c = lobe_amplitudes(n0, F0, omega_eff);
  const double scale = std::max(std::abs(c.c1), std::abs(c.c2));
  double period = kTwoPi;
  bool closed = true;
  double w = omega_eff;
  if (std::abs(c.c1) <= 1e-12 * scale && omega_eff != 0.0) {
    period = kTwoPi / std::abs(omega_eff);
  } else if (std::abs(c.c2) > 1e-12 * scale) {
    const auto exact = rationalize(omega_eff, 1e-12, 1000);
    if (exact) {
      w = exact->value();
      period = closure_period(*exact);
    } else {
      period = options.fallback_span;
      closed = false;
    }
  }
  return sample_uniform(period, options.samples, closed, [=](double t) {
    return c.c1 * cplx{std::cos(t), -std::sin(t)} - c.c2 * cplx{std::cos(w * t), std::sin(w * t)};
  });
}

double curve_diameter(const PlanarCurve& c) { return diameter_of(c.points); }

double hausdorff_distance(const PlanarCurve& a, const PlanarCurve& b) {
  require_closed(a, "hausdorff_distance");
  require_closed(b, "hausdorff_distance");
  const TrigSeries sa = fourier_series(a);
  const TrigSeries sb = fourier_series(b);
  const double floor = 1e-13 * std::max(diameter_of(a.points), diameter_of(b.points));
  const auto na = static_cast<int>(a.points.size());
  const auto nb = static_cast<int>(b.points.size());
  return std::max(directed_distance(sa, na, sb, nb, floor), directed_distance(sb, nb, sa, na, floor));
}

SimilarityFit similarity_match(const PlanarCurve& a, const PlanarCurve& b) {
  require_closed(a, "similarity_match");
  require_closed(b, "similarity_match");
  const double diam_a = diameter_of(a.points);
  const double diam_b = diameter_of(b.points);
  if (!(diam_a > 0.0) || !(diam_b > 0.0)) {
    throw std::invalid_argument("similarity_match: degenerate curve with zero diameter");
  }

  const TrigSeries sa = fourier_series(a);
  const TrigSeries sb = fourier_series(b);
  const TrigSeries sa_reflected = reflect(sa);

  const ShiftFit direct = best_shift(sa, sb);
  const ShiftFit mirrored = best_shift(sa_reflected, sb);
  // Prefer the unreflected fit unless reflection is clearly better.
  const bool use_reflection = mirrored.mismatch < direct.mismatch - 1e-12 * sb.power();
  const ShiftFit& fit = use_reflection ? mirrored : direct;
  const TrigSeries& source = use_reflection ? sa_reflected : sa;

  SimilarityFit out;
  out.reflection = use_reflection;
  out.scale = std::abs(fit.w);
  out.rotation = std::arg(fit.w);
  out.parameter_shift = fit.tau / kTwoPi;
  out.translation = sb.mean - fit.w * source.mean;

  const TrigSeries mapped = transform(source, fit, sb.mean);
  const auto na = static_cast<int>(a.points.size());
  const auto nb = static_cast<int>(b.points.size());
  const double diam = std::max(out.scale * diam_a, diam_b);
  const double floor = 1e-13 * diam;
  const double h = std::max(directed_distance(mapped, na, sb, nb, floor),
                            directed_distance(sb, nb, mapped, na, floor));
  out.residual = h / diam;
  return out;
}

DualityReport verify_duality(double n0, double F0, double omega, double tolerance,
                             const CurveOptions& options) {
  if (omega == 0.0) throw std::domain_error("verify_duality: omega = 0 has no hypotrochoid");
  if (is_secular(omega)) throw SecularSingularError("verify_duality: omega = -1 is secular");

  DualityReport rep;
  rep.params = {n0, F0, omega};
  rep.tolerance = tolerance;
  rep.hypotrochoid = to_hypotrochoid(n0, F0, omega);
  const PlanarCurve hyp = hypotrochoid_curve(rep.hypotrochoid, options);
  const PlanarCurve orbit = trajectory_curve(n0, F0, omega, options);
  rep.fit = similarity_match(hyp, orbit);
  rep.expected_scale = kSqrt2 / (omega + 1.0);
  rep.scale_matches =
      std::abs(rep.fit.scale - std::abs(rep.expected_scale)) <= 1e-6 * std::abs(rep.expected_scale);
  rep.pass = rep.fit.residual <= tolerance;
  return rep;
}

}  // namespace ptfoucault
