#pragma once

// Taylor-series propagation of the truncated Fock-space state in the
// interaction picture, templated on the working precision. Used for the
// non-normal regimes where double-precision round-off is amplified faster
// than any step-size refinement can compensate.

#include "ptfoucault/fock_oracle.hpp"

namespace ptfoucault::detail {

void evolve_taylor(const FockVector& psi0, const DriveSpec& drive, const SimulationGrid& grid,
                   const EvolveOptions& options, const StateObserver& observe);

}  // namespace ptfoucault::detail
