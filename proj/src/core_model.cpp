#include "ptfoucault/core_model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ptfoucault {

std::string to_string(DriveFamily family) {
  switch (family) {
    case DriveFamily::PtComplex:
      return "pt";
    case DriveFamily::RealCosine:
      return "cos";
  }
  return "unknown";
}

DriveFamily drive_family_from_string(const std::string& name) {
  if (name == "pt" || name == "PT_COMPLEX") return DriveFamily::PtComplex;
  if (name == "cos" || name == "REAL_COSINE") return DriveFamily::RealCosine;
  throw std::invalid_argument("unknown drive family '" + name + "' (expected pt or cos)");
}

void DriveSpec::check() const {
  if (!std::isfinite(F0)) throw std::invalid_argument("drive amplitude F0 must be finite");
  if (!std::isfinite(omega)) throw std::invalid_argument("drive frequency omega must be finite");
  if (sign != 1 && sign != -1) throw std::invalid_argument("drive sign must be +1 or -1");
}

std::int64_t SimulationGrid::step_count() const {
  const double span = (t_end - t_start) / dt;
  return static_cast<std::int64_t>(std::ceil(span - 1e-9));
}

std::vector<double> SimulationGrid::times() const {
  const std::int64_t steps = step_count();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (std::int64_t k = 0; k < steps; ++k) out.push_back(t_start + static_cast<double>(k) * dt);
  out.push_back(t_end);
  return out;
}

double effective_omega(const DriveSpec& drive) {
  if (drive.family != DriveFamily::PtComplex) {
    throw std::invalid_argument("effective_omega is defined for the PT_COMPLEX family only");
  }
  return static_cast<double>(drive.sign) * drive.omega;
}

cplx drive_value(const DriveSpec& drive, double t) {
  const double phase = drive.omega * t;
  if (drive.family == DriveFamily::RealCosine) return {drive.F0 * std::cos(phase), 0.0};
  return {drive.F0 * std::cos(phase), drive.F0 * static_cast<double>(drive.sign) * std::sin(phase)};
}

std::string to_string(DiagnosticCode code) {
  switch (code) {
    case DiagnosticCode::SecularSingular:
      return "SECULAR_SINGULAR";
    case DiagnosticCode::ResonantLimit:
      return "RESONANT_LIMIT";
    case DiagnosticCode::GridTooLarge:
      return "GRID_TOO_LARGE";
    case DiagnosticCode::InvalidGrid:
      return "INVALID_GRID";
    case DiagnosticCode::InvalidDrive:
      return "INVALID_DRIVE";
    case DiagnosticCode::InvalidAmplitude:
      return "INVALID_AMPLITUDE";
  }
  return "UNKNOWN";
}

bool ValidationReport::ok() const {
  for (const auto& d : diagnostics) {
    if (d.fatal) return false;
  }
  return true;
}

bool ValidationReport::has(DiagnosticCode code) const {
  for (const auto& d : diagnostics) {
    if (d.code == code) return true;
  }
  return false;
}

ValidationReport validate(const DriveSpec& drive, const CoherentAmplitude& amplitude,
                          const SimulationGrid& grid) {
  ValidationReport report;
  auto add = [&](DiagnosticCode code, bool fatal, std::string msg) {
    report.diagnostics.push_back({code, fatal, std::move(msg)});
  };

  try {
    drive.check();
  } catch (const std::invalid_argument& e) {
    add(DiagnosticCode::InvalidDrive, true, e.what());
  }
  if (!std::isfinite(amplitude.n0)) {
    add(DiagnosticCode::InvalidAmplitude, true, "coherent amplitude n0 must be finite");
  }

  if (drive.family == DriveFamily::PtComplex && std::isfinite(drive.omega) &&
      (drive.sign == 1 || drive.sign == -1)) {
    const double w = effective_omega(drive);
    if (std::abs(w + 1.0) <= kSecularThreshold) {
      add(DiagnosticCode::SecularSingular, false,
          "omega_eff = -1: closed form has a vanishing denominator; use the secular limit");
    }
    if (std::abs(w - 1.0) <= kResonantThreshold) {
      add(DiagnosticCode::ResonantLimit, false,
          "omega_eff = +1: resonant PT drive, Wei-Norman f2 uses its removable limit");
    }
  }

  if (!std::isfinite(grid.dt) || grid.dt <= 0.0) {
    add(DiagnosticCode::InvalidGrid, true, "time step dt must be positive");
  } else if (!std::isfinite(grid.t_start) || !std::isfinite(grid.t_end) ||
             grid.t_end <= grid.t_start) {
    add(DiagnosticCode::InvalidGrid, true, "grid requires t_end > t_start");
  } else if ((grid.t_end - grid.t_start) / grid.dt > grid.max_steps) {
    add(DiagnosticCode::GridTooLarge, true,
        "grid exceeds the step cap of " + std::to_string(static_cast<long long>(grid.max_steps)));
  }
  return report;
}

Rational::Rational(std::int64_t p, std::int64_t q) {
  if (q == 0) throw std::invalid_argument("rational with zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
  num = g == 0 ? 0 : p / g;
  den = g == 0 ? 1 : q / g;
}

std::optional<Rational> rationalize(double x, double tol, std::int64_t max_den) {
  if (!std::isfinite(x)) return std::nullopt;
  // Convergents h/k of the continued fraction of x.
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(x));
  std::int64_t k_prev = 0, k = 1;
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(x - static_cast<double>(h) / static_cast<double>(k)) <= tol) return Rational(h, k);
    if (frac < 1e-15) break;
    const double inv = 1.0 / frac;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    frac = inv - std::floor(inv);
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return std::nullopt;
}

}  // namespace ptfoucault
