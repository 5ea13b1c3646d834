#include "ptfoucault/wei_norman.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ptfoucault/quadrature.hpp"

namespace ptfoucault {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kNestedPanel = 0.25;

cplx unit_phase(double phase) { return {std::cos(phase), std::sin(phase)}; }

void require_series_grid(std::span<const double> times) {
  if (times.empty() || times.front() != 0.0) {
    throw std::invalid_argument("Wei-Norman series grid must start at t = 0");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("Wei-Norman series grid must be strictly increasing");
    }
  }
}

}  // namespace

DriveFunction DriveFunction::from_spec(const DriveSpec& drive) {
  drive.check();
  return {[drive](double t) { return drive_value(drive, t); },
          to_string(drive.family) + " F0=" + std::to_string(drive.F0) +
              " omega=" + std::to_string(drive.omega) + " sign=" + std::to_string(drive.sign)};
}

DriveFunction DriveFunction::zero() {
  return {[](double) { return cplx{0.0, 0.0}; }, "zero"};
}

cplx f2_closed_pt(const DriveSpec& drive, double t) {
  const double w = effective_omega(drive);
  const double detuning = w - 1.0;
  if (std::abs(detuning) <= kResonantThreshold) return {drive.F0 * t, 0.0};
  // (e^{ix} - 1)/(i d) written without the cancellation in e^{ix} - 1.
  const double x = detuning * t;
  const double half = std::sin(0.5 * x);
  return drive.F0 * cplx{std::sin(x), 2.0 * half * half} / detuning;
}

cplx f2_numeric(const DriveFunction& drive, double t, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("f2_numeric tolerance must be positive");
  if (t == 0.0) return {0.0, 0.0};
  return adaptive_simpson([&](double s) { return drive(s) * unit_phase(-s); }, 0.0, t, tol).value;
}

WeiNormanCoefficients f_numeric(const DriveFunction& drive, double t, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("f_numeric tolerance must be positive");
  const auto g2 = [&](double s) { return drive(s) * unit_phase(-s); };
  const auto g3 = [&](double s) { return std::conj(drive(s)) * unit_phase(s); };

  WeiNormanCoefficients c;
  c.t = t;
  c.f1 = {t, 0.0};
  if (t == 0.0) return c;

  c.f2 = f2_numeric(drive, t, tol);
  c.f3 = adaptive_simpson(g3, 0.0, t, tol).value;

  // The nested integral is taken panel by panel so each inner quadrature
  // only spans its own short panel on top of the running f2.
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(t) / kNestedPanel)));
  const double width = t / panels;
  const double panel_tol = 0.5 * tol / panels;
  cplx running{0.0, 0.0};
  for (int k = 0; k < panels; ++k) {
    const double a = k * width;
    const double b = (k + 1 == panels) ? t : (k + 1) * width;
    const auto outer = [&](double s) {
      const cplx inner = running + adaptive_simpson(g2, a, s, 1e-2 * panel_tol).value;
      return -kI * g3(s) * inner;
    };
    c.f0 += adaptive_simpson(outer, a, b, panel_tol).value;
    running += adaptive_simpson(g2, a, b, 1e-2 * panel_tol).value;
  }
  return c;
}

std::vector<WeiNormanCoefficients> wn_series(const DriveFunction& drive,
                                             std::span<const double> times, double tol) {
  require_series_grid(times);
  const auto g2 = [&](double s) { return drive(s) * unit_phase(-s); };
  const auto g3 = [&](double s) { return std::conj(drive(s)) * unit_phase(s); };
  const double span = std::max(times.back(), 1e-300);

  std::vector<WeiNormanCoefficients> out(times.size());
  out[0].t = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double a = times[k - 1];
    const double b = times[k];
    const double seg_tol = std::max(tol * (b - a) / span, 1e-18);
    const WeiNormanCoefficients& prev = out[k - 1];
    WeiNormanCoefficients& cur = out[k];
    cur.t = b;
    cur.f1 = {b, 0.0};
    cur.f2 = prev.f2 + adaptive_simpson(g2, a, b, seg_tol).value;
    cur.f3 = prev.f3 + adaptive_simpson(g3, a, b, seg_tol).value;
    const auto outer = [&](double s) {
      const cplx inner = prev.f2 + adaptive_simpson(g2, a, s, 1e-2 * seg_tol).value;
      return -kI * g3(s) * inner;
    };
    cur.f0 = prev.f0 + adaptive_simpson(outer, a, b, seg_tol).value;
  }
  return out;
}

std::vector<WeiNormanCoefficients> wn_series_pt(const DriveSpec& drive,
                                                std::span<const double> times, double tol) {
  require_series_grid(times);
  const auto g3 = [&](double s) { return std::conj(drive_value(drive, s)) * unit_phase(s); };
  const auto integrand = [&](double s) { return -kI * f2_closed_pt(drive, s) * g3(s); };
  const double span = std::max(times.back(), 1e-300);

  std::vector<WeiNormanCoefficients> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    out[k].t = t;
    out[k].f1 = {t, 0.0};
    out[k].f2 = f2_closed_pt(drive, t);
    out[k].f3 = std::conj(out[k].f2);
    if (k > 0) {
      const double a = times[k - 1];
      const double seg_tol = std::max(tol * (t - a) / span, 1e-18);
      out[k].f0 = out[k - 1].f0 + adaptive_simpson(integrand, a, t, seg_tol).value;
    }
  }
  return out;
}

double ResidualReport::max() const { return std::max({f0, f1, f2, f3}); }

ResidualReport wn_residual(std::span<const WeiNormanCoefficients> coeffs,
                           const DriveFunction& drive) {
  ResidualReport r;
  for (std::size_t k = 1; k + 1 < coeffs.size(); ++k) {
    const auto& lo = coeffs[k - 1];
    const auto& mid = coeffs[k];
    const auto& hi = coeffs[k + 1];
    // Three-point derivative at mid, second order on non-uniform spacing too.
    const double h1 = mid.t - lo.t;
    const double h2 = hi.t - mid.t;
    const double wl = -h2 / (h1 * (h1 + h2));
    const double wm = (h2 - h1) / (h1 * h2);
    const double wh = h1 / (h2 * (h1 + h2));
    const auto deriv = [&](const cplx& a, const cplx& b, const cplx& c) {
      return wl * a + wm * b + wh * c;
    };
    const double t = mid.t;
    const cplx F = drive(t);
    const cplx rhs2 = F * unit_phase(-t);
    const cplx rhs3 = std::conj(F) * unit_phase(t);
    const cplx rhs0 = -kI * mid.f2 * rhs3;

    r.f0 = std::max(r.f0, std::abs(deriv(lo.f0, mid.f0, hi.f0) - rhs0));
    r.f1 = std::max(r.f1, std::abs(deriv(lo.f1, mid.f1, hi.f1) - 1.0));
    r.f2 = std::max(r.f2, std::abs(deriv(lo.f2, mid.f2, hi.f2) - rhs2));
    r.f3 = std::max(r.f3, std::abs(deriv(lo.f3, mid.f3, hi.f3) - rhs3));
    ++r.points;
  }
  return r;
}

}  // namespace ptfoucault
