#pragma once

#include <vector>

#include "spde/integrator.hpp"
#include "spde/spectral.hpp"

namespace spde::control {

// Constructive approximate controllability for the deterministic system:
// steer any start state to any smooth target over a fixed horizon with an
// essentially bounded control.
//
// Phase 1 on [0, T1]: zero control; the free dynamics smooths and contracts
// the state.  Phase 2 on [T1, T]: track the linear path z(t) from x(T1) to
// the target, with u = z' + A z - N(z) so the path solves the equation
// identically in continuum.  The residual at T is pure discretization error.

struct ControlPlan {
    double dt = 0;
    double t1 = 0;               // phase split
    double horizon = 0;
    std::vector<spectral::Field> u;  // piecewise-constant control per step
    double sup_u_vnorm = 0;          // reported L^inf([0,T]; V) magnitude
};

// Builds the two-phase plan.  mollify_eps > 0 applies semigroup smoothing to
// the target until |a - e^{-theta A} a|_H <= mollify_eps / 4.
ControlPlan synthesize_control(const spectral::Field& x0, const spectral::Field& a,
                               double T, double dt, double t1,
                               double mollify_eps = 0);

struct ReachabilityReport {
    double residual_v = 0;
    double residual_h = 0;
    double sup_u_vnorm = 0;
    double epsilon = 0;
    bool pass = false;
};

// Runs the deterministic system under the synthesized plan and measures the
// terminal residual against the target.
ReachabilityReport verify_reachability(const spectral::Field& x0,
                                       const spectral::Field& a, double T,
                                       double dt, double t1, double epsilon);

}  // namespace spde::control
