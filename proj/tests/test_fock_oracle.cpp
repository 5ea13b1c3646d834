#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "ptfoucault/fock_oracle.hpp"
#include "ptfoucault/trajectory.hpp"

using namespace ptfoucault;

namespace {

DriveSpec pt(double F0, double w) { return {F0, w, 1, DriveFamily::PtComplex}; }
DriveSpec cosine(double F0, double w) { return {F0, w, 1, DriveFamily::RealCosine}; }

// Coherent amplitude under H = n + 1/2 + F (a + a^dag): i alpha' = alpha + F.
// RK4 on the scalar equation; exact to ~1e-12 at this step.
cplx alpha_reference(cplx alpha0, const DriveSpec& d, double t) {
  const cplx i{0.0, 1.0};
  auto rhs = [&](double s, cplx a) { return -i * (a + drive_value(d, s)); };
  const int steps = std::max(1, static_cast<int>(std::ceil(t / 1e-3)));
  const double h = t / steps;
  cplx a = alpha0;
  for (int k = 0; k < steps; ++k) {
    const double s = k * h;
    const cplx k1 = rhs(s, a);
    const cplx k2 = rhs(s + h / 2, a + h / 2 * k1);
    const cplx k3 = rhs(s + h / 2, a + h / 2 * k2);
    const cplx k4 = rhs(s + h, a + h * k3);
    a += h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return a;
}

Eigen::MatrixXcd lowering(int n) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

// <theta> straight from the phase-state definition, as a dense projector sum.
double pegg_barnett_reference(const Eigen::VectorXcd& psi, double theta0) {
  const int n = static_cast<int>(psi.size());
  const Eigen::VectorXcd v = psi / psi.norm();
  double mean = 0.0;
  for (int m = 0; m < n; ++m) {
    const double th = theta0 + 2.0 * kPi * m / n;
    cplx overlap{0.0, 0.0};
    for (int k = 0; k < n; ++k) overlap += std::polar(1.0, -k * th) * v[k];
    mean += th * std::norm(overlap) / n;
  }
  return mean;
}

std::vector<ObservableRecord> run(const FockVector& psi0, const DriveSpec& d, double t_end, double dt,
                                  EvolveOptions opts = {}) {
  std::vector<ObservableRecord> out;
  evolve_observe(psi0, d, {0.0, t_end, dt}, opts, [&](double t, const FockVector& psi) {
    out.push_back(observables(psi, t, {ExpectationConvention::Normalized, false, {}}));
  });
  return out;
}

}  // namespace

TEST_CASE("coherent states") {
  const FockVector vac = coherent_state({0.0, 0.0}, 16);
  CHECK(std::abs(vac.amplitudes()[0] - cplx{1.0, 0.0}) <= 1e-15);
  CHECK(vac.amplitudes().tail(15).norm() == 0.0);

  const FockVector c = coherent_state({2.0, 0.0}, 64);
  CHECK(std::abs(c.norm() - 1.0) <= 1e-12);
  const ObservableRecord r = observables(c);
  CHECK(std::abs(r.n_mean - 4.0) <= 1e-10);
  CHECK(std::abs(r.x_mean - 2.0 * std::sqrt(2.0)) <= 1e-10);
  CHECK(std::abs(r.p_mean) <= 1e-12);
  CHECK(c.truncation_safe());

  // Complex amplitude: <p> = sqrt2 Im alpha.
  const ObservableRecord ci = observables(coherent_state({1.0, -1.5}, 64));
  CHECK(std::abs(ci.p_mean + 1.5 * std::sqrt(2.0)) <= 1e-10);

  // An undersized space is flagged, not rejected.
  const FockVector cut = coherent_state({4.0, 0.0}, 12);
  CHECK_FALSE(cut.truncation_safe());
  CHECK(cut.tail_mass() > 1e-10);

  CHECK(recommended_dimension(2.0) == 36);
  CHECK(recommended_dimension(0.0) == 16);
}

TEST_CASE("ladder operators are exact") {
  const int n = 12;
  const Eigen::MatrixXcd a = OperatorMatrix::annihilation(n).dense();
  const Eigen::MatrixXcd ad = OperatorMatrix::creation(n).dense();
  CHECK((a - lowering(n)).norm() == 0.0);
  CHECK((ad - a.adjoint()).norm() == 0.0);
  const Eigen::MatrixXcd comm = a * ad - ad * a;
  CHECK((comm.topLeftCorner(n - 1, n - 1) - Eigen::MatrixXcd::Identity(n - 1, n - 1)).norm() <= 1e-14);
  const Eigen::MatrixXcd num = OperatorMatrix::number(n).dense();
  CHECK((num - ad * a).norm() <= 1e-14);

  Eigen::VectorXcd v = Eigen::VectorXcd::Random(n);
  CHECK((OperatorMatrix::annihilation(n).apply(v) - a * v).norm() <= 1e-14);
}

TEST_CASE("Hamiltonian structure") {
  const int n = 16;
  const Eigen::MatrixXcd h0 = hamiltonian_at(0.7, pt(0.0, 2.0), n).dense();
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) diag(k, k) = k + 0.5;
  CHECK((h0 - diag).norm() == 0.0);

  for (double t : {0.0, 0.3, 1.9, 5.0}) {
    const Eigen::MatrixXcd hc = hamiltonian_at(t, cosine(1.3, 2.0), n).dense();
    CHECK((hc - hc.adjoint()).norm() == 0.0);
  }

  // Anti-Hermitian part of the PT Hamiltonian: i Im F (a + a^dag).
  const Eigen::MatrixXcd h = hamiltonian_at(kPi / 2, pt(1.0, 1.0), n).dense();
  const Eigen::MatrixXcd anti = 0.5 * (h - h.adjoint());
  const Eigen::MatrixXcd q = lowering(n) + lowering(n).adjoint();
  const double qnorm = Eigen::JacobiSVD<Eigen::MatrixXcd>(q).singularValues()(0);
  const double anorm = Eigen::JacobiSVD<Eigen::MatrixXcd>(anti).singularValues()(0);
  CHECK(anorm == doctest::Approx(std::abs(std::sin(kPi / 2)) * 1.0 * qnorm).epsilon(1e-12));
  CHECK((h - h.adjoint()).norm() > 0.0);

  CHECK_THROWS(hamiltonian_at(0.0, pt(1.0, 1.0), 1));
}

TEST_CASE("free evolution rotates the coherent state") {
  const auto recs = run(coherent_state({1.0, 0.0}, 32), pt(0.0, 1.0), 4.0 * kPi, 1e-3);
  double worst = 0.0;
  for (const auto& r : recs) worst = std::max(worst, std::abs(r.x_mean - std::sqrt(2.0) * std::cos(r.t)));
  CHECK(worst <= 1e-8);
}

TEST_CASE("RK4 agrees with the dense matrix exponential") {
  // Constant drive when omega = 0, so exp(-i H dt) is exact.
  const int n = 24;
  const DriveSpec d = pt(0.4, 0.0);
  const FockVector psi0 = coherent_state({0.5, 0.2}, n);
  const auto states = evolve(psi0, d, {0.0, 0.05, 1e-3});
  const Eigen::MatrixXcd H = hamiltonian_at(0.0, d, n).dense();
  const Eigen::MatrixXcd U = (cplx{0.0, -0.05} * H).exp();
  const Eigen::VectorXcd expected = U * psi0.amplitudes();
  const Eigen::VectorXcd got = states.back().psi.amplitudes() * std::exp(states.back().psi.log_scale());
  CHECK((got - expected).norm() <= 1e-9);
}

TEST_CASE("Hermitian drive preserves the norm") {
  const auto recs = run(FockVector::basis(64, 0), cosine(0.5, 2.0), 4.0 * kPi, 1e-3);
  double drift = 0.0;
  for (const auto& r : recs) drift = std::max(drift, std::abs(r.norm - 1.0));
  CHECK(drift <= 1e-8);
}

TEST_CASE("RK4 converges at fourth order on a Hermitian problem") {
  const DriveSpec d = cosine(1.0, 2.0);
  const FockVector psi0 = coherent_state({1.0, 0.0}, 32);
  auto final_state = [&](double dt) {
    return evolve(psi0, d, {0.0, 2.0, dt}).back().psi.amplitudes();
  };
  const Eigen::VectorXcd ref = final_state(0.04 / 8);
  const double e1 = (final_state(0.04) - ref).norm();
  const double e2 = (final_state(0.02) - ref).norm();
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("integrators agree with each other and with the amplitude equation") {
  const DriveSpec d = pt(0.5, 2.0);
  const FockVector psi0 = coherent_state({1.0, 0.0}, 64);
  const double T = 3.0;
  const cplx a = alpha_reference({1.0, 0.0}, d, T);

  for (Integrator m : {Integrator::Rk4, Integrator::MidpointExponential, Integrator::Taylor}) {
    CAPTURE(to_string(m));
    EvolveOptions o;
    o.method = m;
    const auto recs = run(psi0, d, T, m == Integrator::Taylor ? 0.05 : 1e-3, o);
    const double tol = m == Integrator::MidpointExponential ? 1e-5 : 1e-9;
    CHECK(std::abs(recs.back().x_mean - std::sqrt(2.0) * a.real()) <= tol);
    CHECK(std::abs(recs.back().p_mean - std::sqrt(2.0) * a.imag()) <= tol);
  }
}

TEST_CASE("extended precision Taylor runs agree") {
  const DriveSpec d = pt(3.0, 1.0);
  const FockVector psi0 = FockVector::basis(48, 0);
  std::vector<double> finals;
  for (Precision p : {Precision::Double, Precision::Quad, Precision::Digits50}) {
    EvolveOptions o;
    o.method = Integrator::Taylor;
    o.precision = p;
    finals.push_back(run(psi0, d, 1.0, 0.1, o).back().p_mean);
  }
  CHECK(finals[0] == doctest::Approx(-3.0 * std::sqrt(2.0) * std::sin(1.0)).epsilon(1e-9));
  CHECK(std::abs(finals[1] - finals[2]) <= 1e-13);

  EvolveOptions bad;
  bad.precision = Precision::Quad;
  CHECK_THROWS(run(psi0, d, 0.1, 0.01, bad));
}

TEST_CASE("integrator and precision names round-trip") {
  for (Integrator m : {Integrator::Rk4, Integrator::MidpointExponential, Integrator::Taylor}) {
    CHECK(integrator_from_string(to_string(m)) == m);
  }
  for (Precision p : {Precision::Double, Precision::Quad, Precision::Digits50}) {
    CHECK(precision_from_string(to_string(p)) == p);
  }
  CHECK_THROWS(integrator_from_string("euler"));
  CHECK_THROWS(precision_from_string("single"));
}

TEST_CASE("overflow guard aborts with a diagnostic") {
  EvolveOptions o;
  o.max_log_norm = 5.0;
  try {
    (void)run(FockVector::basis(64, 0), pt(1.0, -1.0), 20.0, 1e-2, o);
    FAIL("expected NormOverflowError");
  } catch (const NormOverflowError& e) {
    CHECK(e.log_norm() > 5.0);
    CHECK(e.time() > 0.0);
  }
}

TEST_CASE("evolve keeps every stride-th state plus the last") {
  EvolveOptions o;
  o.record_stride = 4;
  const auto states = evolve(coherent_state({1.0, 0.0}, 16), pt(0.1, 2.0), {0.0, 1.0, 0.1}, o);
  REQUIRE(states.size() == 4);
  CHECK(states[0].t == 0.0);
  CHECK(states[1].t == doctest::Approx(0.4));
  CHECK(states[2].t == doctest::Approx(0.8));
  CHECK(states[3].t == 1.0);
  // Norm is data: the non-unitary PT evolution is not renormalised.
  CHECK(std::abs(states.back().psi.norm() - 1.0) > 1e-6);
}

TEST_CASE("observables of simple states") {
  const ObservableRecord c = observables(coherent_state({3.0, 0.0}, 64));
  CHECK(std::abs(c.var_x - 0.5) <= 1e-10);
  CHECK(std::abs(c.var_p - 0.5) <= 1e-10);

  const ObservableRecord v = observables(FockVector::basis(8, 0));
  CHECK(v.x_mean == 0.0);
  CHECK(v.p_mean == 0.0);
  CHECK(v.n_mean == 0.0);
  CHECK(v.norm == 1.0);

  // Raw expectations scale with the squared norm; normalised ones do not.
  const FockVector scaled(2.0 * coherent_state({1.0, 0.0}, 32).amplitudes());
  const ObservableRecord raw = observables(scaled, 0.0, {ExpectationConvention::Raw, false, {}});
  const ObservableRecord nrm = observables(scaled, 0.0, {ExpectationConvention::Normalized, false, {}});
  CHECK(nrm.x_mean == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(raw.x_mean == doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-12));

  CHECK_THROWS(observables(FockVector(Eigen::VectorXcd::Zero(4))));
}

TEST_CASE("log-scaled states behave like their scaled-out vectors") {
  FockVector big(coherent_state({1.0, 0.0}, 16).amplitudes() * 1e200);
  big.rebalance();
  CHECK(big.log_norm() == doctest::Approx(200.0 * std::log(10.0)).epsilon(1e-12));
  CHECK(observables(big).x_mean == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  const FockVector huge(coherent_state({1.0, 0.0}, 16).amplitudes(), 1000.0);
  CHECK(std::isinf(huge.norm()));
  CHECK(huge.log_norm() == doctest::Approx(1000.0));
}

TEST_CASE("mid-trajectory PT state matches the closed form") {
  const auto recs = run(coherent_state({1.0, 0.0}, 64), pt(0.5, 2.0), 1.0, 1e-3);
  const Quadratures q = quadratures_pt(1.0, 0.5, 2.0, 1.0);
  CHECK(std::abs(recs.back().x_mean - q.x) <= 1e-5);
  CHECK(std::abs(recs.back().p_mean - q.p) <= 1e-5);
}

TEST_CASE("oracle scenario: variance constancy and truncation stability") {
  const DriveSpec d = pt(0.5, 2.0);
  const auto small = run(coherent_state({1.0, 0.0}, 64), d, 4.0 * kPi, 1e-3);
  const auto large = run(coherent_state({1.0, 0.0}, 128), d, 4.0 * kPi, 1e-3);
  REQUIRE(small.size() == large.size());
  double drift = 0.0, change = 0.0;
  for (std::size_t k = 0; k < small.size(); ++k) {
    drift = std::max({drift, std::abs(small[k].var_x - 0.5), std::abs(small[k].var_p - 0.5)});
    change = std::max({change, std::abs(small[k].x_mean - large[k].x_mean),
                       std::abs(small[k].p_mean - large[k].p_mean),
                       std::abs(small[k].n_mean - large[k].n_mean)});
  }
  CHECK(drift <= 1e-6);
  CHECK(change <= 1e-8);
}

TEST_CASE("Pegg-Barnett phase") {
  const int n = 64;
  // Default window is symmetric, so the uniform vacuum distribution averages to 0.
  CHECK(std::abs(pegg_barnett_theta(FockVector::basis(n, 0))) <= 1e-12);
  CHECK(default_theta0(n) == doctest::Approx(-kPi * (n - 1) / n));
  // Window starting at -pi: the mean of the grid itself, -pi/N.
  CHECK(pegg_barnett_theta(FockVector::basis(n, 0), -kPi) == doctest::Approx(-kPi / n).epsilon(1e-12));

  const FockVector c = coherent_state({3.0, 0.0}, n);
  const double th = pegg_barnett_theta(c, -kPi);
  CHECK(std::abs(th) <= 0.05);
  CHECK(th == doctest::Approx(pegg_barnett_reference(c.amplitudes(), -kPi)).epsilon(1e-10));

  const FockVector ci = coherent_state({0.0, 2.0}, n);
  CHECK(pegg_barnett_theta(ci) == doctest::Approx(pegg_barnett_reference(ci.amplitudes(), default_theta0(n))).epsilon(1e-10));
  CHECK(pegg_barnett_theta(ci) == doctest::Approx(kPi / 2).epsilon(0.05));

  // Resonant vacuum at t = pi/2: same sign as arctan(-F0).
  const auto states = evolve(FockVector::basis(n, 0), pt(3.0, 1.0), {0.0, kPi / 2, 1e-3}, {});
  CHECK(pegg_barnett_theta(states.back().psi) < 0.0);
  CHECK(phase_closed(3.0, kPi / 2) < 0.0);
}

TEST_CASE("Wigner grids") {
  std::vector<double> axis;
  for (int k = 0; k <= 100; ++k) axis.push_back(-5.0 + 0.1 * k);

  const WignerGrid vac = wigner_grid(FockVector::basis(32, 0), axis, axis);
  Eigen::Index i, j;
  vac.values.maxCoeff(&i, &j);
  CHECK(axis[i] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(axis[j] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(vac.integral - 1.0) <= 1e-3);
  CHECK(vac.support_captured);

  // Coherent state: the displaced Gaussian (1/pi) exp(-(x - x0)^2 - (p - p0)^2).
  const FockVector c = coherent_state({2.0, 0.0}, 64);
  const WignerGrid w = wigner_grid(c, axis, axis);
  w.values.maxCoeff(&i, &j);
  CHECK(std::abs(axis[i] - 2.0 * std::sqrt(2.0)) <= 0.1);
  CHECK(std::abs(axis[j]) <= 0.1);
  double worst = 0.0;
  for (std::size_t a = 0; a < axis.size(); a += 5) {
    for (std::size_t b = 0; b < axis.size(); b += 5) {
      const double dx = axis[a] - 2.0 * std::sqrt(2.0), dp = axis[b];
      worst = std::max(worst, std::abs(w.values(a, b) - std::exp(-dx * dx - dp * dp) / kPi));
    }
  }
  CHECK(worst <= 1e-10);

  // A grid that misses the support is flagged.
  std::vector<double> narrow = {3.0, 3.5, 4.0};
  CHECK_FALSE(wigner_grid(FockVector::basis(8, 0), narrow, narrow).support_captured);

  WignerOptions tiny;
  tiny.max_points = 10;
  CHECK_THROWS(wigner_grid(FockVector::basis(8, 0), axis, axis, tiny));
}

TEST_CASE("Wigner peak follows the closed-form orbit") {
  std::vector<double> axis;
  for (int k = 0; k <= 60; ++k) axis.push_back(-3.0 + 0.1 * k);
  const double cell = 0.1;
  const auto states = evolve(coherent_state({1.0, 0.0}, 48), pt(0.5, 2.0), {0.0, 3.0, 1e-3}, {Integrator::Rk4, Precision::Double, kDefaultMaxLogNorm, 500});
  for (const auto& s : states) {
    const WignerGrid w = wigner_grid(s.psi, axis, axis);
    Eigen::Index i, j;
    w.values.maxCoeff(&i, &j);
    const Quadratures q = quadratures_pt(1.0, 0.5, 2.0, s.t);
    CHECK(std::abs(axis[i] - q.x) <= 2 * cell);
    CHECK(std::abs(axis[j] - q.p) <= 2 * cell);
  }
}

TEST_CASE("convergence self-check") {
  const ConvergenceReport r =
      convergence_check(coherent_state({1.0, 0.0}, 64), pt(0.5, 2.0), {0.0, 2.0, 5e-3});
  CHECK(r.max_observable_change <= 1e-7);
  CHECK(r.max_observable_change > 0.0);
  CHECK(r.fine.t == doctest::Approx(2.0));
}
