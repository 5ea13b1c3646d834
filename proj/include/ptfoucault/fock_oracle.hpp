#pragma once

// Brute-force reference dynamics in a truncated Fock space.
//
// The oscillator is represented on the number states |0>..|N-1> with the
// Hamiltonian
//   H(t) = (n + 1/2) + F(t) (a + a^dag),
// which is non-Hermitian whenever Im F(t) != 0. States are propagated
// directly (no renormalisation); expectation values are normalised,
// <A> = <psi|A|psi>/<psi|psi>, unless the raw convention is requested.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ptfoucault/core_model.hpp"

namespace ptfoucault {

inline constexpr double kDefaultTailCap = 1e-10;
/// ln(1e300): default ceiling on ln ||psi|| before evolve aborts.
inline constexpr double kDefaultMaxLogNorm = 690.7755278982137;

/// Fock-basis state. Amplitudes are stored with a separate log scale so that
/// the physical vector is exp(log_scale) * amplitudes; growth of the norm under
/// non-unitary evolution is kept as data rather than overflowing.
class FockVector {
 public:
  explicit FockVector(Eigen::VectorXcd amplitudes, double log_scale = 0.0);

  static FockVector basis(int dim, int n);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  double log_scale() const { return log_scale_; }

  double log_norm() const;
  double norm() const;  // may be +inf when log_norm() > ~709
  /// |c_{N-1}|^2 / ||c||^2.
  double tail_mass() const;
  bool truncation_safe(double cap = kDefaultTailCap) const { return tail_mass() <= cap; }
  Eigen::VectorXcd normalized() const;

  /// Moves magnitude out of the amplitudes and into the log scale.
  void rebalance();

 private:
  Eigen::VectorXcd amps_;
  double log_scale_ = 0.0;
};

/// Tridiagonal operator on the truncated space; a, a^dag, n and H(t) all fit.
struct OperatorMatrix {
  Eigen::VectorXcd diag;
  Eigen::VectorXcd upper;  // (k, k+1)
  Eigen::VectorXcd lower;  // (k+1, k)

  int dim() const { return static_cast<int>(diag.size()); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd dense() const;

  static OperatorMatrix annihilation(int dim);
  static OperatorMatrix creation(int dim);
  static OperatorMatrix number(int dim);
};

struct ObservableRecord {
  double t = 0.0;
  double x_mean = 0.0;
  double p_mean = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
  double n_mean = 0.0;
  double norm = 0.0;
  double theta_pb = 0.0;
  double tail_mass = 0.0;
};

enum class ExpectationConvention { Normalized, Raw };

/// Taylor is a high-order series step in the interaction picture; it is the
/// only integrator that runs in extended precision.
enum class Integrator { Rk4, MidpointExponential, Taylor };

std::string to_string(Integrator method);
Integrator integrator_from_string(const std::string& name);

/// Working precision of the Taylor integrator: binary64, binary128 (about 34
/// digits) or 50 decimal digits. Needed where the non-Hermitian drive amplifies
/// round-off in the high Fock levels faster than dt refinement can help.
enum class Precision { Double, Quad, Digits50 };

std::string to_string(Precision precision);
Precision precision_from_string(const std::string& name);

/// Default theta0 = -pi (N-1)/N, the window symmetric about zero.
double default_theta0(int dim);

/// Coherent state c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!). Check truncation_safe() on the result.
FockVector coherent_state(cplx alpha, int dim);
/// Smallest dimension the |alpha|^2 + 8|alpha| + 16 guideline allows.
int recommended_dimension(double max_abs_alpha);

OperatorMatrix hamiltonian_at(double t, const DriveSpec& drive, int dim);

/// Raised when ln ||psi|| exceeds the configured ceiling during evolution.
class NormOverflowError : public std::runtime_error {
 public:
  NormOverflowError(const std::string& what, double t, double log_norm)
      : std::runtime_error(what), t_(t), log_norm_(log_norm) {}
  double time() const { return t_; }
  double log_norm() const { return log_norm_; }

 private:
  double t_;
  double log_norm_;
};

struct EvolveOptions {
  Integrator method = Integrator::Rk4;
  Precision precision = Precision::Double;
  double max_log_norm = kDefaultMaxLogNorm;
  /// Keep every k-th grid state (the final state is always kept).
  int record_stride = 1;
};

struct TimedState {
  double t;
  FockVector psi;
};

using StateObserver = std::function<void(double t, const FockVector& psi)>;

/// Steps psi0 across the grid, calling observe at every grid time including t_start.
void evolve_observe(const FockVector& psi0, const DriveSpec& drive, const SimulationGrid& grid,
                    const EvolveOptions& options, const StateObserver& observe);

std::vector<TimedState> evolve(const FockVector& psi0, const DriveSpec& drive,
                               const SimulationGrid& grid, const EvolveOptions& options = {});

struct ObservableOptions {
  ExpectationConvention convention = ExpectationConvention::Normalized;
  bool with_phase = true;
  std::optional<double> theta0;  // default_theta0(dim) when unset
};

ObservableRecord observables(const FockVector& psi, double t = 0.0,
                             const ObservableOptions& options = {});

/// Normalised <theta> for the Pegg-Barnett phase operator with s + 1 = dim phase states.
double pegg_barnett_theta(const FockVector& psi, std::optional<double> theta0 = std::nullopt);

struct WignerGrid {
  std::vector<double> xs;
  std::vector<double> ps;
  Eigen::MatrixXd values;  // values(i, j) = W(xs[i], ps[j])
  double integral = 0.0;
  bool support_captured = false;  // integral within 1e-3 of 1
};

struct WignerOptions {
  int max_dim = 256;
  std::size_t max_points = 1'000'000;
};

/// W(x, p) = (1/pi) <D(beta) Pi D^dag(beta)>, beta = (x + ip)/sqrt2, for the normalised state.
WignerGrid wigner_grid(const FockVector& psi, const std::vector<double>& xs,
                       const std::vector<double>& ps, const WignerOptions& options = {});

struct ConvergenceReport {
  double max_observable_change = 0.0;
  ObservableRecord coarse;
  ObservableRecord fine;
};

/// Runs the grid at dt and dt/2 and compares final normalised observables.
ConvergenceReport convergence_check(const FockVector& psi0, const DriveSpec& drive,
                                    const SimulationGrid& grid, const EvolveOptions& options = {});

}  // namespace ptfoucault
