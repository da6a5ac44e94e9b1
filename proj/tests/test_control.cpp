#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spde/control.hpp"

using namespace spde;
using namespace spde::control;

namespace {
spectral::Field e1(const spectral::SpectralGrid& grid, double h_norm_target) {
    return spectral::single_mode(grid, 1, h_norm_target / std::numbers::sqrt2);
}
}  // namespace

TEST_CASE("degenerate plans") {
    spectral::SpectralGrid grid(8);
    spectral::Field zero(grid);

    SUBCASE("origin to origin needs no control") {
        auto plan = synthesize_control(zero, zero, 0.5, 1e-3, 0.25);
        CHECK(plan.sup_u_vnorm == 0.0);
        auto rep = verify_reachability(zero, zero, 0.5, 1e-3, 0.25, 1e-6);
        CHECK(rep.residual_v == 0.0);
        CHECK(rep.pass);
    }
    SUBCASE("already at a persistent target") {
        // Target equal to the start: phase 1 drains the state, phase 2 tracks
        // back up; the terminal residual stays at discretization size.
        auto a = e1(grid, 0.05);
        auto rep = verify_reachability(a, a, 1.0, 1e-3, 0.5, 1e-2);
        CHECK(rep.pass);
    }
}

TEST_CASE("parameter domain") {
    spectral::SpectralGrid grid(8);
    spectral::Field zero(grid);
    CHECK_THROWS_AS(synthesize_control(zero, zero, 1.0, 1e-3, 0.0), DomainError);
    CHECK_THROWS_AS(synthesize_control(zero, zero, 1.0, 1e-3, 1.0), DomainError);
    CHECK_THROWS_AS(synthesize_control(zero, zero, 1e-4, 1e-3, 0.5), DomainError);
    CHECK_THROWS_AS(verify_reachability(zero, zero, 1.0, 1e-3, 0.5, 0.0),
                    DomainError);
}

TEST_CASE("reachability on a reduced configuration") {
    spectral::SpectralGrid grid(16);
    auto x0 = e1(grid, 2.0);
    auto target = e1(grid, 0.05);

    auto rep = verify_reachability(x0, target, 0.5, 1e-3, 0.25, 5e-2);
    CHECK(rep.pass);
    CHECK(rep.residual_v < 5e-2);
    CHECK(std::isfinite(rep.sup_u_vnorm));
    CHECK(rep.sup_u_vnorm > 0);

    SUBCASE("residual shrinks roughly linearly in the step size") {
        auto fine = verify_reachability(x0, target, 0.5, 5e-4, 0.25, 5e-2);
        CHECK(rep.residual_v / fine.residual_v >= 1.5);
    }
}

TEST_CASE("multi-mode target") {
    spectral::SpectralGrid grid(16);
    auto x0 = e1(grid, 1.0);
    spectral::Field target(grid);
    target.set_amp(1, {0.05, 0.02});
    target.set_amp(3, {-0.01, 0.03});
    target.set_amp(7, {0.004, 0.0});

    auto rep = verify_reachability(x0, target, 1.0, 1e-3, 0.5, 2e-2);
    CHECK(rep.pass);
    CHECK(rep.residual_h <= rep.residual_v * (1 + 1e-12));  // Poincare ordering
}

TEST_CASE("phase-one smoothing keeps the handoff state tame") {
    spectral::SpectralGrid grid(16);
    Rng rng(19);
    auto rough = spectral::random_field(grid, rng);
    rough *= 10.0 / std::max(spectral::h_norm(rough), 1e-12);
    auto target = e1(grid, 0.1);
    auto plan = synthesize_control(rough, target, 1.0, 1e-3, 0.5);
    CHECK(std::isfinite(plan.sup_u_vnorm));
    auto rep = verify_reachability(rough, target, 1.0, 1e-3, 0.5, 2e-2);
    CHECK(rep.pass);
}
