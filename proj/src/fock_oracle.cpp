#include "ptfoucault/fock_oracle.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "fock_taylor.hpp"

#if defined(__SSE2__)
#include <pmmintrin.h>
#include <xmmintrin.h>
#endif

namespace ptfoucault {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kRebalanceHigh = 1e64;
constexpr double kRebalanceLow = 1e-64;

std::vector<double> sqrt_table(int dim) {
  std::vector<double> sq(static_cast<std::size_t>(dim) + 1);
  for (int k = 0; k <= dim; ++k) sq[k] = std::sqrt(static_cast<double>(k));
  return sq;
}

// Levels [lo, hi) that take part in a step; outside it the operators act as zero.
struct Band {
  Eigen::Index lo = 0;
  Eigen::Index hi = 0;
  Eigen::Index size() const { return hi - lo; }
};

// out = (n + 1/2) v + F (a + a^dag) v on the band
void apply_hamiltonian(cplx F, const std::vector<double>& sq, const Eigen::VectorXcd& v,
                       Eigen::VectorXcd& out, Band b) {
  for (Eigen::Index k = b.lo; k < b.hi; ++k) {
    cplx coupling{};
    if (k > b.lo) coupling += sq[k] * v[k - 1];
    if (k + 1 < b.hi) coupling += sq[k + 1] * v[k + 1];
    out[k] = (static_cast<double>(k) + 0.5) * v[k] + F * coupling;
  }
}

// out = F (a + a^dag) v on the band
void apply_coupling(cplx F, const std::vector<double>& sq, const Eigen::VectorXcd& v,
                    Eigen::VectorXcd& out, Band b) {
  for (Eigen::Index k = b.lo; k < b.hi; ++k) {
    cplx coupling{};
    if (k > b.lo) coupling += sq[k] * v[k - 1];
    if (k + 1 < b.hi) coupling += sq[k + 1] * v[k + 1];
    out[k] = F * coupling;
  }
}

// Amplitudes far out in the Fock tail decay into subnormal range, where
// arithmetic is orders of magnitude slower. They carry no information, so the
// stepping loop runs with flush-to-zero enabled.
class SubnormalFlush {
 public:
#if defined(__SSE2__)
  SubnormalFlush() : saved_(_mm_getcsr()) {
    _MM_SET_FLUSH_ZERO_MODE(_MM_FLUSH_ZERO_ON);
    _MM_SET_DENORMALS_ZERO_MODE(_MM_DENORMALS_ZERO_ON);
  }
  ~SubnormalFlush() { _mm_setcsr(saved_); }

 private:
  unsigned int saved_;
#endif
};

class Stepper {
 public:
  Stepper(const DriveSpec& drive, int dim, Integrator method)
      : drive_(drive), method_(method), sq_(sqrt_table(dim)), k1_(dim), k2_(dim), k3_(dim),
        k4_(dim), tmp_(dim) {}

  void step(Eigen::VectorXcd& psi, double t, double h) {
    const Band b = active_band(psi);
    if (method_ == Integrator::Rk4) {
      rk4(psi, t, h, b);
    } else {
      midpoint_exponential(psi, t, h, b);
    }
  }

 private:
  // Levels whose amplitude exceeds kBandFloor of the largest one, widened by
  // kBandMargin on each side. Everything outside is set to exactly zero; a
  // single step cannot move weight further than the margin.
  static constexpr double kBandFloor = 1e-30;
  static constexpr Eigen::Index kBandMargin = 96;

  static Band active_band(Eigen::VectorXcd& psi) {
    const Eigen::Index n = psi.size();
    const double cut = kBandFloor * kBandFloor * psi.cwiseAbs2().maxCoeff();
    Eigen::Index first = 0;
    while (first < n && std::norm(psi[first]) <= cut) ++first;
    if (first == n) return {0, n};
    Eigen::Index last = n - 1;
    while (last > first && std::norm(psi[last]) <= cut) --last;
    Band b{std::max<Eigen::Index>(0, first - kBandMargin),
           std::min<Eigen::Index>(n, last + 1 + kBandMargin)};
    psi.head(b.lo).setZero();
    psi.tail(n - b.hi).setZero();
    return b;
  }

  void rk4(Eigen::VectorXcd& psi, double t, double h, Band b) {
    const cplx f0 = drive_value(drive_, t);
    const cplx fm = drive_value(drive_, t + 0.5 * h);
    const cplx f1 = drive_value(drive_, t + h);
    const auto seg = [&](Eigen::VectorXcd& v) { return v.segment(b.lo, b.size()); };

    apply_hamiltonian(f0, sq_, psi, k1_, b);
    seg(k1_) *= -kI;
    seg(tmp_) = seg(psi) + (0.5 * h) * seg(k1_);
    apply_hamiltonian(fm, sq_, tmp_, k2_, b);
    seg(k2_) *= -kI;
    seg(tmp_) = seg(psi) + (0.5 * h) * seg(k2_);
    apply_hamiltonian(fm, sq_, tmp_, k3_, b);
    seg(k3_) *= -kI;
    seg(tmp_) = seg(psi) + h * seg(k3_);
    apply_hamiltonian(f1, sq_, tmp_, k4_, b);
    seg(k4_) *= -kI;
    seg(psi) += (h / 6.0) * (seg(k1_) + 2.0 * seg(k2_) + 2.0 * seg(k3_) + seg(k4_));
  }

  // exp(-i H(t + h/2) h) with the diagonal part split symmetrically and the
  // coupling exponential summed as a Taylor series.
  void midpoint_exponential(Eigen::VectorXcd& psi, double t, double h, Band b) {
    const Eigen::Index n = psi.size();
    const cplx fm = drive_value(drive_, t + 0.5 * h);
    if (h != phase_h_) {
      phase_.resize(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double ph = -(static_cast<double>(k) + 0.5) * 0.5 * h;
        phase_[k] = cplx{std::cos(ph), std::sin(ph)};
      }
      phase_h_ = h;
    }
    const auto seg = [&](Eigen::VectorXcd& v) { return v.segment(b.lo, b.size()); };
    seg(psi).array() *= seg(phase_).array();
    seg(tmp_) = seg(psi);  // running term
    seg(k1_) = seg(psi);   // running sum
    const double base = seg(psi).norm();
    for (int j = 1; j <= 80; ++j) {
      apply_coupling(fm, sq_, tmp_, k2_, b);
      seg(tmp_) = (-kI * h / static_cast<double>(j)) * seg(k2_);
      seg(k1_) += seg(tmp_);
      if (seg(tmp_).norm() <= 1e-17 * std::max(base, seg(k1_).norm())) break;
    }
    seg(psi) = seg(k1_).cwiseProduct(seg(phase_));
  }

  DriveSpec drive_;
  Integrator method_;
  std::vector<double> sq_;
  Eigen::VectorXcd k1_, k2_, k3_, k4_, tmp_;
  Eigen::VectorXcd phase_;
  double phase_h_ = 0.0;
};

}  // namespace

FockVector::FockVector(Eigen::VectorXcd amplitudes, double log_scale)
    : amps_(std::move(amplitudes)), log_scale_(log_scale) {
  if (amps_.size() < 2) throw std::invalid_argument("Fock vectors need dimension >= 2");
  if (!amps_.allFinite() || !std::isfinite(log_scale_)) {
    throw std::invalid_argument("Fock vector amplitudes must be finite");
  }
}

FockVector FockVector::basis(int dim, int n) {
  if (n < 0 || n >= dim) throw std::out_of_range("basis index outside the truncated space");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v[n] = 1.0;
  return FockVector(std::move(v));
}

double FockVector::log_norm() const { return log_scale_ + std::log(amps_.stableNorm()); }

double FockVector::norm() const { return std::exp(log_norm()); }

double FockVector::tail_mass() const {
  const double total = amps_.squaredNorm();
  if (total == 0.0) return 0.0;
  return std::norm(amps_[amps_.size() - 1]) / total;
}

Eigen::VectorXcd FockVector::normalized() const {
  const double n = amps_.stableNorm();
  if (n == 0.0) throw std::domain_error("cannot normalise a zero-norm state");
  return amps_ * (1.0 / n);
}

void FockVector::rebalance() {
  const double n = amps_.stableNorm();
  if (n == 0.0 || (n < kRebalanceHigh && n > kRebalanceLow)) return;
  amps_ *= 1.0 / n;
  log_scale_ += std::log(n);
}

Eigen::VectorXcd OperatorMatrix::apply(const Eigen::VectorXcd& v) const {
  const Eigen::Index n = diag.size();
  if (v.size() != n) throw std::invalid_argument("operator/vector dimension mismatch");
  Eigen::VectorXcd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cplx acc = diag[k] * v[k];
    if (k + 1 < n) acc += upper[k] * v[k + 1];
    if (k > 0) acc += lower[k - 1] * v[k - 1];
    out[k] = acc;
  }
  return out;
}

Eigen::MatrixXcd OperatorMatrix::dense() const {
  const Eigen::Index n = diag.size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    m(k, k) = diag[k];
    if (k + 1 < n) {
      m(k, k + 1) = upper[k];
      m(k + 1, k) = lower[k];
    }
  }
  return m;
}

OperatorMatrix OperatorMatrix::annihilation(int dim) {
  OperatorMatrix a;
  a.diag = Eigen::VectorXcd::Zero(dim);
  a.upper = Eigen::VectorXcd::Zero(dim - 1);
  a.lower = Eigen::VectorXcd::Zero(dim - 1);
  for (int k = 0; k + 1 < dim; ++k) a.upper[k] = std::sqrt(static_cast<double>(k + 1));
  return a;
}

OperatorMatrix OperatorMatrix::creation(int dim) {
  OperatorMatrix ad = annihilation(dim);
  std::swap(ad.upper, ad.lower);
  return ad;
}

OperatorMatrix OperatorMatrix::number(int dim) {
  OperatorMatrix n;
  n.diag = Eigen::VectorXcd::Zero(dim);
  n.upper = Eigen::VectorXcd::Zero(dim - 1);
  n.lower = Eigen::VectorXcd::Zero(dim - 1);
  for (int k = 0; k < dim; ++k) n.diag[k] = static_cast<double>(k);
  return n;
}

std::string to_string(Integrator method) {
  switch (method) {
    case Integrator::Rk4:
      return "rk4";
    case Integrator::MidpointExponential:
      return "midpoint-exp";
    case Integrator::Taylor:
      return "taylor";
  }
  return "?";
}

Integrator integrator_from_string(const std::string& name) {
  if (name == "rk4" || name == "RK4") return Integrator::Rk4;
  if (name == "midpoint-exp" || name == "MIDPOINT_EXPONENTIAL") return Integrator::MidpointExponential;
  if (name == "taylor" || name == "TAYLOR") return Integrator::Taylor;
  throw std::invalid_argument("unknown integrator '" + name + "' (expected rk4, midpoint-exp or taylor)");
}

std::string to_string(Precision precision) {
  switch (precision) {
    case Precision::Double:
      return "double";
    case Precision::Quad:
      return "quad";
    case Precision::Digits50:
      return "digits50";
  }
  return "?";
}

Precision precision_from_string(const std::string& name) {
  if (name == "double") return Precision::Double;
  if (name == "quad") return Precision::Quad;
  if (name == "digits50") return Precision::Digits50;
  throw std::invalid_argument("unknown precision '" + name + "' (expected double, quad or digits50)");
}

double default_theta0(int dim) { return -kPi * static_cast<double>(dim - 1) / dim; }

FockVector coherent_state(cplx alpha, int dim) {
  if (dim < 2) throw std::invalid_argument("coherent_state needs dimension >= 2");
  Eigen::VectorXcd c(dim);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  return FockVector(std::move(c));
}

int recommended_dimension(double max_abs_alpha) {
  const double a = std::abs(max_abs_alpha);
  return std::max(2, static_cast<int>(std::ceil(a * a + 8.0 * a + 16.0)));
}

OperatorMatrix hamiltonian_at(double t, const DriveSpec& drive, int dim) {
  if (dim < 2) throw std::invalid_argument("hamiltonian_at needs dimension >= 2");
  drive.check();
  const cplx F = drive_value(drive, t);
  OperatorMatrix h;
  h.diag.resize(dim);
  h.upper.resize(dim - 1);
  h.lower.resize(dim - 1);
  for (int k = 0; k < dim; ++k) h.diag[k] = static_cast<double>(k) + 0.5;
  for (int k = 0; k + 1 < dim; ++k) {
    const double s = std::sqrt(static_cast<double>(k + 1));
    h.upper[k] = F * s;
    h.lower[k] = F * s;
  }
  return h;
}

void evolve_observe(const FockVector& psi0, const DriveSpec& drive, const SimulationGrid& grid,
                    const EvolveOptions& options, const StateObserver& observe) {
  drive.check();
  if (!(grid.dt > 0.0) || !(grid.t_end > grid.t_start)) {
    throw std::invalid_argument("evolve needs dt > 0 and t_end > t_start");
  }
  if (static_cast<double>(grid.step_count()) > grid.max_steps) {
    throw std::invalid_argument("evolve grid exceeds its step cap");
  }
  if (options.method == Integrator::Taylor) {
    detail::evolve_taylor(psi0, drive, grid, options, observe);
    return;
  }
  if (options.precision != Precision::Double) {
    throw std::invalid_argument("extended precision needs the taylor integrator");
  }

  const SubnormalFlush flush;
  Stepper stepper(drive, psi0.dim(), options.method);
  Eigen::VectorXcd amps = psi0.amplitudes();
  double log_scale = psi0.log_scale();
  const std::vector<double> times = grid.times();
  observe(times.front(), psi0);

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double t = times[k - 1];
    stepper.step(amps, t, times[k] - t);
    if (!amps.allFinite()) {
      throw NormOverflowError("state became non-finite during evolution", times[k],
                              std::numeric_limits<double>::infinity());
    }
    FockVector psi(amps, log_scale);
    psi.rebalance();
    if (psi.log_norm() > options.max_log_norm) {
      throw NormOverflowError("ln||psi|| = " + std::to_string(psi.log_norm()) + " at t = " +
                                  std::to_string(times[k]) + " exceeds the overflow guard",
                              times[k], psi.log_norm());
    }
    amps = psi.amplitudes();
    log_scale = psi.log_scale();
    observe(times[k], psi);
  }
}

std::vector<TimedState> evolve(const FockVector& psi0, const DriveSpec& drive,
                               const SimulationGrid& grid, const EvolveOptions& options) {
  const int stride = std::max(1, options.record_stride);
  const std::int64_t last = grid.step_count();
  std::vector<TimedState> out;
  std::int64_t index = 0;
  evolve_observe(psi0, drive, grid, options, [&](double t, const FockVector& psi) {
    if (index % stride == 0 || index == last) out.push_back({t, psi});
    ++index;
  });
  return out;
}

ObservableRecord observables(const FockVector& psi, double t, const ObservableOptions& options) {
  const Eigen::VectorXcd& c = psi.amplitudes();
  const Eigen::Index n = c.size();
  const double total = c.squaredNorm();
  if (total == 0.0) throw std::domain_error("observables of a zero-norm state");

  cplx a1{}, a2{};
  double num = 0.0, aad = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double pk = std::norm(c[k]);
    num += kk * pk;
    if (k + 1 < n) {
      a1 += std::conj(c[k]) * std::sqrt(kk + 1.0) * c[k + 1];
      aad += (kk + 1.0) * pk;
    }
    if (k + 2 < n) a2 += std::conj(c[k]) * std::sqrt((kk + 1.0) * (kk + 2.0)) * c[k + 2];
  }

  // Normalised: divide by <c|c>. Raw: physical vector is e^{log_scale} c.
  const double weight = options.convention == ExpectationConvention::Normalized
                            ? 1.0 / total
                            : std::exp(2.0 * psi.log_scale());
  a1 *= weight;
  a2 *= weight;
  num *= weight;
  aad *= weight;

  ObservableRecord r;
  r.t = t;
  r.x_mean = kSqrt2 * a1.real();
  r.p_mean = kSqrt2 * a1.imag();
  const double x2 = 0.5 * (2.0 * a2.real() + aad + num);
  const double p2 = 0.5 * (-2.0 * a2.real() + aad + num);
  r.var_x = x2 - r.x_mean * r.x_mean;
  r.var_p = p2 - r.p_mean * r.p_mean;
  r.n_mean = num;
  r.norm = psi.norm();
  r.tail_mass = psi.tail_mass();
  if (options.with_phase) r.theta_pb = pegg_barnett_theta(psi, options.theta0);
  return r;
}

double pegg_barnett_theta(const FockVector& psi, std::optional<double> theta0) {
  const Eigen::VectorXcd& c = psi.amplitudes();
  const int n = psi.dim();
  const double total = c.squaredNorm();
  if (total == 0.0) throw std::domain_error("Pegg-Barnett phase of a zero-norm state");
  const double th0 = theta0.value_or(default_theta0(n));

  // <theta_m|psi> = n^{-1/2} sum_k e^{-ik theta0} c_k e^{-2 pi i k m / n}
  std::vector<cplx> shifted(n);
  for (int k = 0; k < n; ++k) {
    const double ph = -static_cast<double>(k) * th0;
    shifted[k] = c[k] * cplx{std::cos(ph), std::sin(ph)};
  }
  Eigen::FFT<double> fft;
  std::vector<cplx> proj;
  fft.fwd(proj, shifted);

  double mean = 0.0;
  for (int m = 0; m < n; ++m) {
    const double theta_m = th0 + 2.0 * kPi * m / n;
    mean += theta_m * std::norm(proj[m]);
  }
  return mean / (static_cast<double>(n) * total);
}

WignerGrid wigner_grid(const FockVector& psi, const std::vector<double>& xs,
                       const std::vector<double>& ps, const WignerOptions& options) {
  const int dim = psi.dim();
  if (dim > options.max_dim) {
    throw std::invalid_argument("wigner_grid: dimension " + std::to_string(dim) +
                                " exceeds the cap of " + std::to_string(options.max_dim));
  }
  if (xs.size() < 2 || ps.size() < 2 || xs.size() * ps.size() > options.max_points) {
    throw std::invalid_argument("wigner_grid: grid must have >= 2 points per axis and respect the cap");
  }
  const Eigen::VectorXcd c = psi.normalized();

  WignerGrid w;
  w.xs = xs;
  w.ps = ps;
  w.values.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ps.size()));

  // Matrix elements of the displaced parity, m = n + d >= n:
  //   <m|D Pi D^dag|n> = (-1)^n sqrt(n!/m!) (2 beta)^d e^{-2|beta|^2} L_n^{(d)}(4|beta|^2)
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) {
      const cplx beta = cplx{xs[i], ps[j]} / kSqrt2;
      const double b2 = std::norm(beta);
      const double y = 4.0 * b2;
      const double damp = std::exp(-b2);
      double total = 0.0;
      cplx pref = damp;  // (2 beta)^d / sqrt(d!) with one e^{-|beta|^2} folded in
      for (int d = 0; d < dim; ++d) {
        double lag_prev = 0.0;
        double lag = 1.0;
        cplx s = pref;
        for (int n = 0; n + d < dim; ++n) {
          if (n == 1) {
            lag_prev = lag;
            lag = 1.0 + d - y;
          } else if (n > 1) {
            const double k = n - 1;
            const double next = ((2.0 * k + 1.0 + d - y) * lag - (k + d) * lag_prev) / (k + 1.0);
            lag_prev = lag;
            lag = next;
          }
          const cplx element = ((n % 2 == 0) ? 1.0 : -1.0) * s * lag;
          const cplx weight = c[n] * std::conj(c[n + d]);
          total += (d == 0 ? 1.0 : 2.0) * (weight * element).real();
          s *= std::sqrt((n + 1.0) / (n + 1.0 + d));
        }
        pref *= 2.0 * beta / std::sqrt(d + 1.0);
      }
      w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = total * damp / kPi;
    }
  }

  // Trapezoidal integral over the (possibly non-uniform) grid.
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ps.size(); ++j) {
      const double cell = (xs[i + 1] - xs[i]) * (ps[j + 1] - ps[j]);
      const double avg = 0.25 * (w.values(i, j) + w.values(i + 1, j) + w.values(i, j + 1) +
                                 w.values(i + 1, j + 1));
      integral += cell * avg;
    }
  }
  w.integral = integral;
  w.support_captured = std::abs(integral - 1.0) <= 1e-3;
  return w;
}

ConvergenceReport convergence_check(const FockVector& psi0, const DriveSpec& drive,
                                    const SimulationGrid& grid, const EvolveOptions& options) {
  auto final_record = [&](double dt) {
    SimulationGrid g = grid;
    g.dt = dt;
    FockVector last = psi0;
    double t_last = grid.t_start;
    evolve_observe(psi0, drive, g, options, [&](double t, const FockVector& psi) {
      last = psi;
      t_last = t;
    });
    return observables(last, t_last, {ExpectationConvention::Normalized, false, std::nullopt});
  };
  ConvergenceReport rep;
  rep.coarse = final_record(grid.dt);
  rep.fine = final_record(0.5 * grid.dt);
  rep.max_observable_change = std::max({std::abs(rep.coarse.x_mean - rep.fine.x_mean),
                                        std::abs(rep.coarse.p_mean - rep.fine.p_mean),
                                        std::abs(rep.coarse.var_x - rep.fine.var_x),
                                        std::abs(rep.coarse.var_p - rep.fine.var_p),
                                        std::abs(rep.coarse.n_mean - rep.fine.n_mean)});
  return rep;
}

}  // namespace ptfoucault
