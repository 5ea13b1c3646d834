#include "fock_taylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/float128.hpp>

namespace ptfoucault::detail {

namespace {

template <class Real>
struct C {
  Real re{0};
  Real im{0};
};

template <class Real>
C<Real> mul(const C<Real>& a, const C<Real>& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

template <class Real>
C<Real> cexp(const Real& re, const Real& im) {
  using std::cos;
  using std::exp;
  using std::sin;
  const Real m = exp(re);
  return {m * cos(im), m * sin(im)};
}

// State vector as separate real and imaginary arrays.
template <class Real>
struct CVec {
  std::vector<Real> re, im;
  explicit CVec(std::size_t n = 0) : re(n), im(n) {}
  std::size_t size() const { return re.size(); }
  void zero() {
    std::fill(re.begin(), re.end(), Real(0));
    std::fill(im.begin(), im.end(), Real(0));
  }
  Real max_abs2() const {
    Real m(0);
    for (std::size_t k = 0; k < re.size(); ++k) {
      const Real v = re[k] * re[k] + im[k] * im[k];
      if (v > m) m = v;
    }
    return m;
  }
};

// F(t) written as a sum of exponentials A exp(lambda t).
struct ExpTerm {
  cplx amplitude;
  cplx rate;
};

std::vector<ExpTerm> drive_terms(const DriveSpec& d) {
  if (d.family == DriveFamily::PtComplex) {
    return {{cplx{d.F0, 0.0}, cplx{0.0, d.sign * d.omega}}};
  }
  return {{cplx{0.5 * d.F0, 0.0}, cplx{0.0, d.omega}}, {cplx{0.5 * d.F0, 0.0}, cplx{0.0, -d.omega}}};
}

template <class Real>
class TaylorPropagator {
 public:
  TaylorPropagator(const DriveSpec& drive, int dim) : dim_(dim), sq_(dim + 1) {
    using std::sqrt;
    for (int k = 0; k <= dim; ++k) sq_[k] = sqrt(Real(k));
    for (const auto& term : drive_terms(drive)) {
      // a picks up e^{-it}, a^dag picks up e^{+it} in the interaction picture.
      lower_.push_back({term.amplitude, term.rate - cplx{0.0, 1.0}});
      raise_.push_back({term.amplitude, term.rate + cplx{0.0, 1.0}});
    }
    const Real eps = std::numeric_limits<Real>::epsilon();
    tol2_ = eps * eps * Real(1e-4);
  }

  // phi <- phi(t + h) for i phi' = G(t) phi, G = g_-(t) a + g_+(t) a^dag.
  void step(CVec<Real>& phi, const Real& t, const Real& h) {
    coefficients(lower_, t, h, glo_);
    coefficients(raise_, t, h, ghi_);

    const Real base = phi.max_abs2();
    if (base == Real(0)) return;
    z_.assign(1, phi);
    az_.clear();
    adz_.clear();
    CVec<Real> acc = phi;
    int small = 0;
    for (int k = 0; k < kMaxOrder; ++k) {
      az_.emplace_back(dim_);
      adz_.emplace_back(dim_);
      lower(z_[k], az_[k]);
      raise(z_[k], adz_[k]);

      CVec<Real> next(dim_);
      const int jlo = std::min<int>(k, static_cast<int>(glo_.size()) - 1);
      for (int j = 0; j <= jlo; ++j) accumulate(glo_[j], az_[k - j], next);
      const int jhi = std::min<int>(k, static_cast<int>(ghi_.size()) - 1);
      for (int j = 0; j <= jhi; ++j) accumulate(ghi_[j], adz_[k - j], next);
      // next <- -i h next / (k + 1)
      const Real inv = h / Real(k + 1);
      for (int n = 0; n < dim_; ++n) {
        const Real r = next.re[n];
        next.re[n] = next.im[n] * inv;
        next.im[n] = -r * inv;
      }
      for (int n = 0; n < dim_; ++n) {
        acc.re[n] += next.re[n];
        acc.im[n] += next.im[n];
      }
      const Real m = next.max_abs2();
      z_.push_back(std::move(next));
      small = (m <= tol2_ * base) ? small + 1 : 0;
      if (small >= 2) {
        phi = std::move(acc);
        return;
      }
    }
    throw std::runtime_error("Taylor propagator did not converge; reduce dt");
  }

 private:
  static constexpr int kMaxOrder = 400;

  // h^j / j! * sum_m A_m exp(mu_m t) mu_m^j, truncated once negligible.
  void coefficients(const std::vector<ExpTerm>& terms, const Real& t, const Real& h,
                    std::vector<C<Real>>& out) const {
    out.clear();
    std::vector<C<Real>> cur;
    std::vector<C<Real>> step;
    for (const auto& term : terms) {
      const C<Real> e = cexp(Real(term.rate.real()) * t, Real(term.rate.imag()) * t);
      cur.push_back(mul(C<Real>{Real(term.amplitude.real()), Real(term.amplitude.imag())}, e));
      step.push_back({Real(term.rate.real()) * h, Real(term.rate.imag()) * h});
    }
    Real first(0);
    for (int j = 0; j < kMaxOrder; ++j) {
      C<Real> sum;
      for (const auto& c : cur) {
        sum.re += c.re;
        sum.im += c.im;
      }
      const Real mag = sum.re * sum.re + sum.im * sum.im;
      if (j == 0) first = mag;
      out.push_back(sum);
      Real biggest(0);
      for (std::size_t m = 0; m < cur.size(); ++m) {
        cur[m] = mul(cur[m], step[m]);
        cur[m].re /= Real(j + 1);
        cur[m].im /= Real(j + 1);
        biggest = std::max<Real>(biggest, cur[m].re * cur[m].re + cur[m].im * cur[m].im);
      }
      if (biggest <= tol2_ * tol2_ * std::max<Real>(first, Real(1))) break;
    }
  }

  void lower(const CVec<Real>& v, CVec<Real>& out) const {
    for (int n = 0; n + 1 < dim_; ++n) {
      out.re[n] = sq_[n + 1] * v.re[n + 1];
      out.im[n] = sq_[n + 1] * v.im[n + 1];
    }
    out.re[dim_ - 1] = Real(0);
    out.im[dim_ - 1] = Real(0);
  }

  void raise(const CVec<Real>& v, CVec<Real>& out) const {
    out.re[0] = Real(0);
    out.im[0] = Real(0);
    for (int n = 1; n < dim_; ++n) {
      out.re[n] = sq_[n] * v.re[n - 1];
      out.im[n] = sq_[n] * v.im[n - 1];
    }
  }

  void accumulate(const C<Real>& g, const CVec<Real>& v, CVec<Real>& out) const {
    for (int n = 0; n < dim_; ++n) {
      out.re[n] += g.re * v.re[n] - g.im * v.im[n];
      out.im[n] += g.re * v.im[n] + g.im * v.re[n];
    }
  }

  int dim_;
  std::vector<Real> sq_;
  std::vector<ExpTerm> lower_, raise_;
  std::vector<C<Real>> glo_, ghi_;
  std::vector<CVec<Real>> z_, az_, adz_;
  Real tol2_;
};

// psi = e^{-i(n + 1/2) t} phi, scaled down to double with the magnitude moved into the log scale.
template <class Real>
FockVector to_schroedinger(const CVec<Real>& phi, const Real& t, double log_scale) {
  using std::log;
  using std::sqrt;
  const int dim = static_cast<int>(phi.size());
  const Real peak = sqrt(phi.max_abs2());
  const Real scale = peak > Real(0) ? peak : Real(1);
  const C<Real> step = cexp(Real(0), -t);
  C<Real> rot = cexp(Real(0), -t / 2);
  Eigen::VectorXcd amps(dim);
  for (int n = 0; n < dim; ++n) {
    const C<Real> v = mul(rot, C<Real>{phi.re[n] / scale, phi.im[n] / scale});
    amps[n] = cplx{static_cast<double>(v.re), static_cast<double>(v.im)};
    rot = mul(rot, step);
  }
  return FockVector(std::move(amps), log_scale + static_cast<double>(log(scale)));
}

template <class Real>
void run(const FockVector& psi0, const DriveSpec& drive, const SimulationGrid& grid,
         const EvolveOptions& options, const StateObserver& observe) {
  using std::log;
  using std::sqrt;
  const int dim = psi0.dim();
  const std::vector<double> times = grid.times();

  // phi(t0) = e^{i(n + 1/2) t0} psi0
  CVec<Real> phi(static_cast<std::size_t>(dim));
  {
    const Real t0(times.front());
    const C<Real> step = cexp(Real(0), t0);
    C<Real> rot = cexp(Real(0), t0 / 2);
    for (int n = 0; n < dim; ++n) {
      const cplx c = psi0.amplitudes()[n];
      const C<Real> v = mul(rot, C<Real>{Real(c.real()), Real(c.imag())});
      phi.re[n] = v.re;
      phi.im[n] = v.im;
      rot = mul(rot, step);
    }
  }
  double log_scale = psi0.log_scale();
  observe(times.front(), psi0);

  TaylorPropagator<Real> prop(drive, dim);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const Real t(times[k - 1]);
    const Real h = Real(times[k]) - t;
    prop.step(phi, t, h);

    const Real peak = sqrt(phi.max_abs2());
    if (!(peak > Real(0)) || !(peak < Real(1e300))) {
      throw NormOverflowError("state became non-finite during evolution", times[k],
                              std::numeric_limits<double>::infinity());
    }
    // Keep the working vector near unit scale.
    for (int n = 0; n < dim; ++n) {
      phi.re[n] /= peak;
      phi.im[n] /= peak;
    }
    log_scale += static_cast<double>(log(peak));

    FockVector psi = to_schroedinger(phi, Real(times[k]), log_scale);
    if (psi.log_norm() > options.max_log_norm) {
      throw NormOverflowError("ln||psi|| = " + std::to_string(psi.log_norm()) + " at t = " +
                                  std::to_string(times[k]) + " exceeds the overflow guard",
                              times[k], psi.log_norm());
    }
    observe(times[k], psi);
  }
}

}  // namespace

void evolve_taylor(const FockVector& psi0, const DriveSpec& drive, const SimulationGrid& grid,
                   const EvolveOptions& options, const StateObserver& observe) {
  switch (options.precision) {
    case Precision::Double:
      run<double>(psi0, drive, grid, options, observe);
      return;
    case Precision::Quad:
      run<boost::multiprecision::float128>(psi0, drive, grid, options, observe);
      return;
    case Precision::Digits50:
      run<boost::multiprecision::cpp_bin_float_50>(psi0, drive, grid, options, observe);
      return;
  }
}

}  // namespace ptfoucault::detail
