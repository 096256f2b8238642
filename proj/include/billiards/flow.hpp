#pragma once

#include "billiards/hamiltonian.hpp"
#include "billiards/lazutkin.hpp"

#include <vector>

namespace billiards {

struct FlowOptions {
    double tol = 1e-11;       ///< absolute and relative local tolerance on the scaled state
    double first_step = 1e-3;
};

/// State at a sample time. `action` is w + k K(l0) (t - t0), where
/// w = int (L dX - H dt) - l0 (X - x0) is the mixed generating function
/// w(X, l0, t) of the flow map.
struct FlowSample {
    double t = 0.0;
    LazutkinState state;
    double action = 0.0;
};

/// Integrates x' = dH/dl, l' = -dH/dx from t0 to t1 (t1 >= t0), restarting at the
/// Hamiltonian's breakpoints. Throws StepUnderflow when the step control fails
/// or the trajectory leaves the Hamiltonian's domain.
LazutkinState flow(const SuspendedHamiltonian& H, const LazutkinState& s, double t0, double t1,
                   const FlowOptions& opts = {});

/// Same integration, reporting the state and action at each of `times`
/// (sorted, all >= t0).
std::vector<FlowSample> flow_samples(const SuspendedHamiltonian& H, const LazutkinState& s, double t0,
                                     const std::vector<double>& times, const FlowOptions& opts = {});

}  // namespace billiards
