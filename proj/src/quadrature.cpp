#include "ptfoucault/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ptfoucault {

namespace {

using Fn = std::function<std::complex<double>(double)>;

struct SimpsonState {
  const Fn& f;
  int max_depth;
  long evaluations = 0;
  bool exhausted = false;
  double error = 0.0;
};

std::complex<double> refine(SimpsonState& st, double a, double b, std::complex<double> fa,
                            std::complex<double> fm, std::complex<double> fb,
                            std::complex<double> whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const std::complex<double> flm = st.f(lm);
  const std::complex<double> frm = st.f(rm);
  st.evaluations += 2;
  const std::complex<double> left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const std::complex<double> right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const std::complex<double> delta = left + right - whole;
  const double err = std::abs(delta) / 15.0;
  // Below this the Simpson difference is round-off, and halving further only
  // adds noise. Scaled by the integral of |f| over the panel.
  const double mass = (b - a) / 12.0 *
                      (std::abs(fa) + 4.0 * std::abs(flm) + 2.0 * std::abs(fm) +
                       4.0 * std::abs(frm) + std::abs(fb));
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * mass;

  if (err <= std::max(tol, noise) || m <= a || b <= m) {
    st.error += err;
    return left + right + delta / 15.0;
  }
  if (depth >= st.max_depth) {
    st.exhausted = true;
    st.error += err;
    return left + right + delta / 15.0;
  }
  return refine(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         refine(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

QuadratureResult adaptive_simpson(const Fn& f, double a, double b, double tol,
                                  const SimpsonOptions& options) {
  if (!(tol > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
  QuadratureResult result;
  if (a == b) return result;

  const double len = std::abs(b - a);
  const int panels =
      std::clamp(static_cast<int>(std::ceil(len * options.panels_per_unit)), 1, 1 << 20);
  const double h = (b - a) / panels;

  SimpsonState st{f, options.max_depth};
  std::complex<double> total{0.0, 0.0};
  std::complex<double> fa = f(a);
  st.evaluations += 1;
  for (int k = 0; k < panels; ++k) {
    const double pa = a + k * h;
    const double pb = (k + 1 == panels) ? b : a + (k + 1) * h;
    const double pm = 0.5 * (pa + pb);
    const std::complex<double> fm = f(pm);
    const std::complex<double> fb = f(pb);
    st.evaluations += 2;
    const std::complex<double> whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
    total += refine(st, pa, pb, fa, fm, fb, whole, tol / panels, 0);
    fa = fb;
  }

  result.value = total;
  result.error_estimate = st.error;
  result.evaluations = st.evaluations;
  if (st.exhausted) {
    throw QuadratureError("adaptive Simpson exceeded depth cap " +
                              std::to_string(options.max_depth) + " before reaching tolerance",
                          result);
  }
  return result;
}

}  // namespace ptfoucault
