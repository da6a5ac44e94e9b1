#include "spde/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spde::control {

namespace {

long steps_for(double T, double dt) {
    return static_cast<long>(std::ceil(T / dt - 1e-12));
}

}  // namespace

ControlPlan synthesize_control(const spectral::Field& x0, const spectral::Field& a,
                               double T, double dt, double t1, double mollify_eps) {
    if (!(x0.grid() == a.grid()))
        throw DomainError("synthesize_control: grid mismatch");
    if (!(dt > 0) || !(T > dt)) throw DomainError("synthesize_control: need T > dt > 0");
    if (!(t1 > 0 && t1 < T))
        throw DomainError("synthesize_control: phase split must lie in (0, T)");

    spectral::Field target = a;
    if (mollify_eps > 0) {
        // Smooth rough targets: find the largest power-of-two time theta with
        // |a - e^{-theta A} a|_H <= eps / 4 (theta = 0 if a is already fine).
        double theta = 1.0;
        while (theta > 1e-12 &&
               spectral::h_norm(a - spectral::apply_semigroup(a, theta)) >
                   mollify_eps / 4.0)
            theta /= 2.0;
        if (spectral::h_norm(a - spectral::apply_semigroup(a, theta)) <=
            mollify_eps / 4.0)
            target = spectral::apply_semigroup(a, theta);
    }
    if (!(spectral::sobolev_norm(target, 2.0) <
          std::numeric_limits<double>::infinity()))
        throw UsageError("synthesize_control: target too rough for the grid");

    const long n = steps_for(T, dt);
    const long n1 = steps_for(t1, dt);

    ControlPlan plan;
    plan.dt = dt;
    plan.t1 = t1;
    plan.horizon = T;
    plan.u.reserve(static_cast<std::size_t>(n));

    spectral::Field zero(x0.grid());
    for (long i = 0; i < n1; ++i) plan.u.push_back(zero);

    // State reached by the free phase.
    spectral::Field x_t1 =
        n1 > 0 ? sim::solve_deterministic(x0, plan.u, static_cast<double>(n1) * dt,
                                          dt, std::max<long>(n1, 1), true)
                     .states.back()
               : x0;

    // Phase 2: linear path z(t) from x(T1) to the target; the time derivative
    // is the exact constant (target - x(T1)) / (T - T1).
    const double span = T - static_cast<double>(n1) * dt;
    spectral::Field zdot = target - x_t1;
    zdot *= 1.0 / span;

    for (long i = n1; i < n; ++i) {
        double tau = (static_cast<double>(i) + 0.5) * dt -
                     static_cast<double>(n1) * dt;  // step midpoint in phase time
        tau = std::min(std::max(tau, 0.0), span);
        spectral::Field z = x_t1 + tau * zdot;
        // u = z' + A z - N(z), evaluated per step.
        spectral::Field u = zdot;
        auto ua = u.amps();
        auto za = z.amps();
        for (std::size_t k = 0; k < ua.size(); ++k)
            ua[k] += spectral::eigenvalue(static_cast<int>(k) + 1) * za[k];
        u -= spectral::nonlinearity(z);
        plan.sup_u_vnorm = std::max(plan.sup_u_vnorm, spectral::v_norm(u));
        plan.u.push_back(u);
    }
    return plan;
}

ReachabilityReport verify_reachability(const spectral::Field& x0,
                                       const spectral::Field& a, double T,
                                       double dt, double t1, double epsilon) {
    if (!(epsilon > 0)) throw DomainError("verify_reachability: epsilon must be positive");
    ControlPlan plan = synthesize_control(x0, a, T, dt, t1);
    auto traj = sim::solve_deterministic(x0, plan.u, T, dt,
                                         static_cast<int>(plan.u.size()), true);
    spectral::Field err = traj.states.back() - a;
    ReachabilityReport rep;
    rep.residual_v = spectral::v_norm(err);
    rep.residual_h = spectral::h_norm(err);
    rep.sup_u_vnorm = plan.sup_u_vnorm;
    rep.epsilon = epsilon;
    rep.pass = rep.residual_v < epsilon;
    return rep;
}

}  // namespace spde::control
