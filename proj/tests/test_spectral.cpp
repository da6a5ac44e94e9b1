#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spde/spectral.hpp"

using namespace spde;
using namespace spde::spectral;

namespace {
constexpr double kLambda1 = 4.0 * std::numbers::pi * std::numbers::pi;

Field cosine_mode(const SpectralGrid& grid, int k, double c) {
    return single_mode(grid, k, {c, 0.0});  // u(xi) = 2 c cos(2 pi k xi)
}
}  // namespace

TEST_CASE("eigenvalues of the torus Laplacian") {
    CHECK(eigenvalue(1) == doctest::Approx(39.4784176).epsilon(1e-7));
    CHECK(eigenvalue(-3) == doctest::Approx(355.3057).epsilon(1e-6));
    CHECK(eigenvalue(-3) == doctest::Approx(9.0 * kLambda1).epsilon(1e-12));
    CHECK(eigenvalue(2) == eigenvalue(-2));
    CHECK_THROWS_AS(eigenvalue(0), DomainError);
}

TEST_CASE("grid invariants") {
    SpectralGrid g(64);
    CHECK(g.padded_size >= 6 * 64 + 1);
    CHECK(g.padded_size >= 4 * 64);
    CHECK((g.padded_size & (g.padded_size - 1)) == 0);  // power of two
    CHECK_THROWS_AS(SpectralGrid(0), DomainError);
    CHECK_THROWS_AS(SpectralGrid(16, 64), DomainError);  // too small for cubics
}

TEST_CASE("sobolev norms") {
    SpectralGrid grid(8);
    Field zero(grid);
    CHECK(sobolev_norm(zero, 0.7) == 0.0);

    // One mode with |x|_H = 1: the V norm equals sqrt(lambda_1) = 2 pi.
    Field x = cosine_mode(grid, 1, 1.0 / std::numbers::sqrt2);
    CHECK(h_norm(x) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sobolev_norm(x, 1.0) == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-13));
    CHECK(v_norm(x) == doctest::Approx(6.2832).epsilon(1e-4));

    // |A^{1/2} x|_H is the V norm.
    CHECK(fractional_norm(x, 0.5) == doctest::Approx(v_norm(x)).epsilon(1e-14));
}

TEST_CASE("Poincare monotonicity of the scale of norms") {
    SpectralGrid grid(16);
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        Field x = random_field(grid, rng);
        if (h_norm(x) == 0) continue;
        // theta1 <= theta2: |x|_theta1 <= lambda_1^{(theta1-theta2)/2} |x|_theta2.
        double t1 = -0.5, t2 = 1.3;
        double c = std::pow(kLambda1, (t1 - t2) / 2.0);
        CHECK(sobolev_norm(x, t1) <= c * sobolev_norm(x, t2) * (1 + 1e-12));
        CHECK(sobolev_norm(x, 0.0) <= sobolev_norm(x, 1.0));  // c <= 1 here
    }
}

TEST_CASE("semigroup action") {
    SpectralGrid grid(8);
    Field x = cosine_mode(grid, 1, 1.0);

    SUBCASE("identity at t = 0") {
        Field y = apply_semigroup(x, 0.0);
        CHECK(y.amp(1) == x.amp(1));
    }
    SUBCASE("mode-1 decay over unit time") {
        Field y = apply_semigroup(x, 1.0);
        CHECK(std::abs(y.amp(1)) ==
              doctest::Approx(std::exp(-kLambda1)).epsilon(1e-10));
        CHECK(std::abs(y.amp(1)) == doctest::Approx(7.2e-18).epsilon(0.01));
    }
    SUBCASE("negative time rejected") {
        CHECK_THROWS_AS(apply_semigroup(x, -0.1), DomainError);
    }
    SUBCASE("semigroup law") {
        Rng rng(3);
        for (int i = 0; i < 20; ++i) {
            Field f = random_field(grid, rng);
            Field a = apply_semigroup(apply_semigroup(f, 0.013), 0.007);
            Field b = apply_semigroup(f, 0.02);
            CHECK(h_norm(a - b) <= 1e-12 * (1.0 + h_norm(b)));
        }
    }
    SUBCASE("smoothing bound") {
        for (double sigma : {0.5, 1.0, 1.5})
            for (double t : {1e-4, 1e-2, 0.5}) {
                double sup = 0;
                for (int k = 1; k <= 8; ++k)
                    sup = std::max(sup, std::pow(eigenvalue(k), sigma) *
                                            std::exp(-eigenvalue(k) * t));
                double bound =
                    std::pow(sigma / std::numbers::e, sigma) * std::pow(t, -sigma);
                CHECK(sup <= bound * (1 + 1e-12));
            }
    }
}

TEST_CASE("cubic reaction against the cos^3 identity") {
    // u = 2c cos(2 pi xi):  u^3 = 6c^3 cos(2 pi xi) + 2c^3 cos(6 pi xi), so
    // N(u) keeps amplitude c - 3c^3 on mode 1 and -c^3 on mode 3.
    SpectralGrid grid(8);
    const double c = 0.37;
    Field x = cosine_mode(grid, 1, c);
    Field n = nonlinearity(x);
    CHECK(n.amp(1).real() == doctest::Approx(c - 3.0 * c * c * c).epsilon(1e-13));
    CHECK(n.amp(1).imag() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(n.amp(3).real() == doctest::Approx(-c * c * c).epsilon(1e-13));
    for (int k : {2, 4, 5, 6, 7, 8}) CHECK(std::abs(n.amp(k)) <= 1e-15);

    SUBCASE("zero field maps to zero") {
        Field z(grid);
        CHECK(h_norm(nonlinearity(z)) == 0.0);
    }
    SUBCASE("mean defect vanishes for odd fields and matches quadrature") {
        CHECK(cubic_mean_defect(x) == doctest::Approx(0.0).epsilon(1e-15));
        Rng rng(11);
        Field f = random_field(grid, rng);
        auto u = to_physical(f);
        double mean = 0;
        for (double v : u) mean += v - v * v * v;
        mean /= static_cast<double>(u.size());
        CHECK(cubic_mean_defect(f) == doctest::Approx(mean).epsilon(1e-12));
    }
    SUBCASE("overflow raises") {
        Field huge = cosine_mode(grid, 1, 1e140);
        CHECK_THROWS_AS(nonlinearity(huge), NumericalError);
    }
}

TEST_CASE("energy inner product bound and quartic interpolation") {
    SpectralGrid grid(8);
    // Single mode with unit H norm: integral of x^4 by the closed form 6c^4.
    const double c = 1.0 / std::numbers::sqrt2;
    Field x = cosine_mode(grid, 1, c);
    double l4 = l4_norm_pow4(x);
    CHECK(l4 == doctest::Approx(6.0 * c * c * c * c).epsilon(1e-13));
    CHECK(l4 <= v_norm(x) * v_norm(x) * h_norm(x) * h_norm(x));
    CHECK(h_inner(x, nonlinearity(x)) <= 0.25);
}

TEST_CASE("Parseval between spectral and quadrature inner products") {
    SpectralGrid grid(32);
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        Field x = random_field(grid, rng);
        Field y = random_field(grid, rng);
        double a = h_inner(x, y);
        double b = h_inner_quadrature(x, y);
        CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("cutoff function and truncated reaction") {
    CHECK(cutoff_chi(0.99) == 1.0);
    CHECK(cutoff_chi(-0.5) == 1.0);
    CHECK(cutoff_chi(2.0) == 0.0);
    CHECK(cutoff_chi(1.5) == doctest::Approx(0.5).epsilon(1e-15));

    SpectralGrid grid(8);
    Field x = cosine_mode(grid, 1, 0.4);
    const double v = v_norm(x);

    SUBCASE("plateau reproduces the plain reaction") {
        Field a = truncated_nonlinearity(x, v / 0.5);  // |x|_V = 0.5 rho
        Field b = nonlinearity(x);
        CHECK(h_norm(a - b) == 0.0);
    }
    SUBCASE("outside the support the output vanishes") {
        Field a = truncated_nonlinearity(x, v / 3.0);  // |x|_V = 3 rho
        CHECK(h_norm(a) == 0.0);
    }
    SUBCASE("midpoint halves the reaction") {
        Field a = truncated_nonlinearity(x, v / 1.5);  // |x|_V = 1.5 rho
        Field b = nonlinearity(x);
        b *= 0.5;
        CHECK(h_norm(a - b) <= 1e-13 * (1 + h_norm(b)));
    }
    SUBCASE("nonpositive radius rejected") {
        CHECK_THROWS_AS(truncated_nonlinearity(x, 0.0), DomainError);
    }
}

TEST_CASE("projections") {
    SpectralGrid grid(16);
    Rng rng(9);
    Field x = random_field(grid, rng);

    SUBCASE("N = K is the identity split") {
        CHECK(h_norm(project_low(x, 16) - x) == 0.0);
        CHECK(h_norm(project_high(x, 16)) == 0.0);
    }
    SUBCASE("range checks") {
        CHECK_THROWS_AS(project_low(x, 0), DomainError);
        CHECK_THROWS_AS(project_high(x, 17), DomainError);
    }
    SUBCASE("Pythagoras, idempotence, annihilation, reconstruction") {
        for (int N : {1, 5, 15}) {
            Field lo = project_low(x, N), hi = project_high(x, N);
            double nx2 = h_norm(x) * h_norm(x);
            double split = h_norm(lo) * h_norm(lo) + h_norm(hi) * h_norm(hi);
            CHECK(std::abs(nx2 - split) <= 1e-12 * (1 + nx2));
            CHECK(h_norm(project_low(lo, N) - lo) == 0.0);
            CHECK(h_norm(project_low(hi, N)) == 0.0);
            CHECK(h_norm(lo + hi - x) == 0.0);
        }
    }
    SUBCASE("spectral gap tail bound") {
        for (int N : {1, 4, 12}) {
            Field hi = project_high(x, N);
            double bound = std::pow(eigenvalue(N + 1), -0.5) * v_norm(x);
            CHECK(h_norm(hi) <= bound * (1 + 1e-12));
        }
    }
}

TEST_CASE("cubic monotonicity gap is nonnegative") {
    SpectralGrid grid(16);
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        Field x = random_field(grid, rng);
        Field y = random_field(grid, rng);
        CHECK(cubic_monotonicity_gap(x, y) >= -1e-9);
    }
}

TEST_CASE("inequality suite over a quick sample") {
    auto rep = verify_inequality_suite(500, 202409, 32);
    CHECK(rep.violations == 0);
    CHECK(rep.max_innpro <= 0.25 + 1e-9);
    CHECK(rep.max_l4_excess <= 1e-9);
    CHECK(rep.min_monotonicity >= -1e-9);
    // Constant-carrying ratios stay modest for the cubic on the torus.
    CHECK(rep.max_ratio_grad_v < 100.0);
    CHECK(rep.max_ratio_lip_v < 100.0);
    CHECK(rep.max_ratio_lip_h < 100.0);
    CHECK(rep.max_ratio_bound_h < 100.0);
    CHECK(rep.samples == 500);
}

TEST_CASE("field arithmetic and validation") {
    SpectralGrid grid(4);
    Field x = cosine_mode(grid, 1, 1.0);
    CHECK_THROWS_AS(x.amp(0), DomainError);
    CHECK_THROWS_AS(x.amp(5), DomainError);
    CHECK(x.finite());
    x.set_amp(2, {std::nan(""), 0.0});
    CHECK(!x.finite());

    SpectralGrid other(8);
    Field y(other);
    CHECK_THROWS_AS(x += y, DomainError);
}
