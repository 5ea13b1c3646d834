#include <cmath>
#include <random>

#include "doctest.h"
#include "ptfoucault/core_model.hpp"

using namespace ptfoucault;

namespace {

DriveSpec pt(double F0, double omega, int sign = 1) {
  return {F0, omega, sign, DriveFamily::PtComplex};
}

}  // namespace

TEST_CASE("effective omega folds the sign into the frequency") {
  CHECK(effective_omega(pt(1.0, 2.0, +1)) == 2.0);
  CHECK(effective_omega(pt(1.0, 2.0, -1)) == -2.0);
  CHECK(effective_omega(pt(1.0, 0.0, -1)) == 0.0);
  CHECK_THROWS_AS(effective_omega({1.0, 2.0, 1, DriveFamily::RealCosine}), std::invalid_argument);
}

TEST_CASE("drive values at hand-checked times") {
  const cplx a = drive_value(pt(1.0, 1.0, +1), 0.0);
  CHECK(a.real() == 1.0);
  CHECK(a.imag() == 0.0);

  const cplx b = drive_value(pt(2.0, 1.0, -1), kPi / 2);
  CHECK(std::abs(b - cplx{0.0, -2.0}) <= 1e-15);

  const cplx c = drive_value({1.0, 1.0, 1, DriveFamily::RealCosine}, kPi);
  CHECK(c.real() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(c.imag() == 0.0);
}

TEST_CASE("real cosine drive has an exactly zero imaginary part") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int k = 0; k < 200; ++k) {
    CHECK(drive_value({3.0, 1.7, -1, DriveFamily::RealCosine}, u(rng)).imag() == 0.0);
  }
}

TEST_CASE("PT drive modulus is |F0| and the drive is periodic") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uF(-10.0, 10.0), uw(-5.0, 5.0), ut(-20.0, 20.0);
  for (int k = 0; k < 500; ++k) {
    const double F0 = uF(rng);
    double w = uw(rng);
    if (std::abs(w) < 0.05) w = 0.5;
    const int sign = (k % 2 == 0) ? 1 : -1;
    const DriveSpec d = pt(F0, w, sign);
    const double t = ut(rng);
    CHECK(std::abs(std::abs(drive_value(d, t)) - std::abs(F0)) <= 1e-13);
    CHECK(std::abs(drive_value(d, t) - drive_value(d, t + 2.0 * kPi / std::abs(w))) <= 1e-12);
  }
}

TEST_CASE("drive check rejects malformed drives") {
  CHECK_THROWS_AS(pt(NAN, 1.0).check(), std::invalid_argument);
  CHECK_THROWS_AS(pt(1.0, INFINITY).check(), std::invalid_argument);
  CHECK_THROWS_AS(pt(1.0, 1.0, 0).check(), std::invalid_argument);
  CHECK_NOTHROW(pt(1.0, 1.0, -1).check());
}

TEST_CASE("validate reports the secular regime softly") {
  const SimulationGrid grid{0.0, 4.0 * kPi, 1e-3};
  const ValidationReport r = validate(pt(1.0, -1.0, +1), {0.0}, grid);
  CHECK(r.has(DiagnosticCode::SecularSingular));
  CHECK(r.ok());

  // sign = -1 with omega = 1 is the same point.
  CHECK(validate(pt(1.0, 1.0, -1), {0.0}, grid).has(DiagnosticCode::SecularSingular));
  // Just outside the threshold the closed form is used.
  CHECK_FALSE(validate(pt(1.0, -1.0 + 1e-6), {0.0}, grid).has(DiagnosticCode::SecularSingular));
}

TEST_CASE("validate accepts an ordinary configuration") {
  const ValidationReport r = validate(pt(0.5, 2.0), {1.0}, {0.0, 4.0 * kPi, 1e-3});
  CHECK(r.ok());
  CHECK(r.diagnostics.empty());
}

TEST_CASE("validate flags hard grid and parameter errors") {
  CHECK_FALSE(validate(pt(1.0, 2.0), {1.0}, {0.0, 1.0, 0.0}).ok());
  CHECK(validate(pt(1.0, 2.0), {1.0}, {0.0, 1.0, 0.0}).has(DiagnosticCode::InvalidGrid));
  CHECK(validate(pt(1.0, 2.0), {1.0}, {1.0, 1.0, 1e-3}).has(DiagnosticCode::InvalidGrid));
  CHECK(validate(pt(1.0, 2.0), {1.0}, {0.0, 1e5, 1e-3}).has(DiagnosticCode::GridTooLarge));
  CHECK(validate(pt(1.0, 2.0), {NAN}, {0.0, 1.0, 1e-3}).has(DiagnosticCode::InvalidAmplitude));
  CHECK(validate(pt(1.0, 2.0, 3), {1.0}, {0.0, 1.0, 1e-3}).has(DiagnosticCode::InvalidDrive));
}

TEST_CASE("validate never mutates its inputs") {
  const DriveSpec d = pt(1.0, -1.0);
  const CoherentAmplitude a{2.0};
  const SimulationGrid g{0.0, 1.0, 0.0};
  DriveSpec d2 = d;
  CoherentAmplitude a2 = a;
  SimulationGrid g2 = g;
  (void)validate(d2, a2, g2);
  CHECK(d2.F0 == d.F0);
  CHECK(d2.omega == d.omega);
  CHECK(a2.n0 == a.n0);
  CHECK(g2.dt == g.dt);
}

TEST_CASE("grid times include both ends and a short last step") {
  const SimulationGrid g{0.0, 1.0, 0.3};
  CHECK(g.step_count() == 4);
  const auto ts = g.times();
  REQUIRE(ts.size() == 5);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == 1.0);
  CHECK(ts[3] == doctest::Approx(0.9));

  const SimulationGrid exact{0.0, 4.0 * kPi, 4.0 * kPi / 1000};
  CHECK(exact.step_count() == 1000);
}

TEST_CASE("rationals are reduced and rationalize finds small fractions") {
  CHECK(Rational(4, -6) == Rational(-2, 3));
  CHECK(Rational(0, 5) == Rational(0, 1));
  CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);

  CHECK(rationalize(2.0 / 3.0).value() == Rational(2, 3));
  CHECK(rationalize(-2.0).value() == Rational(-2, 1));
  CHECK(rationalize(4.5).value() == Rational(9, 2));
  CHECK_FALSE(rationalize(std::sqrt(2.0), 1e-12, 1000).has_value());
  CHECK_FALSE(rationalize(NAN).has_value());
}

TEST_CASE("enum names round-trip") {
  for (DriveFamily f : {DriveFamily::PtComplex, DriveFamily::RealCosine}) {
    CHECK(drive_family_from_string(to_string(f)) == f);
  }
  CHECK_THROWS(drive_family_from_string("sawtooth"));
}
