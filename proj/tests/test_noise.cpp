#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spde/noise.hpp"

using namespace spde;
using namespace spde::noise;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("noise model admissibility") {
    CHECK_NOTHROW(NoiseModel::standard(16, 1.5));
    CHECK_THROWS_AS(NoiseModel::standard(16, 2.5), DomainError);
    CHECK_THROWS_AS(NoiseModel::standard(16, 1.0), DomainError);
    CHECK_THROWS_AS(NoiseModel::standard(16, 1.5, 2.3), DomainError);  // theta >= 2
    CHECK_THROWS_AS(NoiseModel::standard(16, 1.5, 1.2), DomainError);  // theta' <= 3/2

    // Default family sits on the lower band edge with delta = 1.
    auto m = NoiseModel::standard(8, 1.5, 1.8);
    for (int k = 1; k <= 8; ++k)
        CHECK(m.betas[k - 1] ==
              doctest::Approx(std::pow(spectral::eigenvalue(k), -0.9)).epsilon(1e-14));

    // Out-of-band custom betas are rejected.
    std::vector<double> bad(8, 1.0);
    CHECK_THROWS_AS(NoiseModel::with_betas(1.5, bad, 1.8, 1.8, 1.0), DomainError);

    auto z = NoiseModel::zero(8, 1.5);
    for (double b : z.betas) CHECK(b == 0.0);
}

TEST_CASE("Kanter sampler parameter domain") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_stable_increment(0.0, 0.5, rng), DomainError);
    CHECK_THROWS_AS(sample_stable_increment(1.0, 0.0, rng), DomainError);
    CHECK_THROWS_AS(sample_stable_increment(1.0, 1.0, rng), DomainError);
    for (int i = 0; i < 1000; ++i) CHECK(sample_stable_increment(1e-3, 0.75, rng) > 0);
}

TEST_CASE("Laplace transform of the sampled subordinator") {
    const int n = 20000;
    for (double rho : {0.6, 0.75, 0.9}) {
        Rng rng(static_cast<std::uint64_t>(rho * 100));
        double sum = 0, sumsq = 0;
        for (int i = 0; i < n; ++i) {
            double v = std::exp(-sample_stable_increment(1.0, rho, rng));
            sum += v;
            sumsq += v * v;
        }
        double mean = sum / n;
        double se = std::sqrt((sumsq / n - mean * mean) / n);
        CHECK(std::abs(mean - std::exp(-1.0)) <= 3 * se);
    }
}

TEST_CASE("closed-form law at rho = 1/2") {
    // With Laplace transform e^{-sqrt(eta)}, P(S <= s) = erfc(1 / (2 sqrt(s))).
    const int n = 40000;
    Rng rng(42);
    int hits = 0;
    for (int i = 0; i < n; ++i)
        hits += sample_stable_increment(1.0, 0.5, rng) <= 1.0;
    double phat = static_cast<double>(hits) / n;
    double target = std::erfc(0.5);
    double se = std::sqrt(target * (1 - target) / n);
    CHECK(target == doctest::Approx(0.4795).epsilon(2e-4));
    CHECK(std::abs(phat - target) <= 3 * se);
}

TEST_CASE("self-similar scaling of increments") {
    const int n = 2000;
    const double rho = 0.7;
    Rng rng(77);
    std::vector<double> coarse(n), fine(n);
    for (auto& v : coarse) v = sample_stable_increment(1.0, rho, rng);
    const double rescale = std::pow(2.0, 1.0 / rho);
    for (auto& v : fine) v = rescale * sample_stable_increment(0.5, rho, rng);
    double d = ks_statistic(coarse, fine);
    double crit = 1.628 * std::sqrt(2.0 / n);  // level 0.01
    CHECK(d <= crit);
}

TEST_CASE("sampled paths are strictly increasing from zero") {
    Rng rng(5);
    auto path = sample_path(1.0, 0.05, 0.75, rng);
    CHECK(path.increments.size() == 20);
    double prev = 0;
    for (std::size_t i = 0; i < path.cumulative.size(); ++i) {
        CHECK(path.increments[i] > 0);
        CHECK(path.cumulative[i] > prev);
        prev = path.cumulative[i];
    }

    SUBCASE("single increment when T = dt") {
        auto p1 = sample_path(0.3, 0.3, 0.6, rng);
        CHECK(p1.increments.size() == 1);
    }
    SUBCASE("Laplace transform at the horizon") {
        const int n = 20000;
        Rng r2(6);
        double sum = 0, sumsq = 0;
        for (int i = 0; i < n; ++i) {
            auto p = sample_path(2.0, 0.5, 0.6, r2);
            double v = std::exp(-p.cumulative.back());
            sum += v;
            sumsq += v * v;
        }
        double mean = sum / n, se = std::sqrt((sumsq / n - mean * mean) / n);
        CHECK(std::abs(mean - std::exp(-2.0)) <= 3 * se);
    }
}

TEST_CASE("noise increment second moments") {
    spectral::SpectralGrid grid(8);
    auto model = NoiseModel::standard(8, 1.5);
    const double dS = 0.8;
    const int n = 20000;
    Rng rng(9);

    double sum = 0, sumsq = 0, cross = 0;
    for (int i = 0; i < n; ++i) {
        auto f = noise_increment(model, grid, dS, rng);
        double nrm2 = spectral::h_norm(f) * spectral::h_norm(f);
        sum += nrm2;
        sumsq += nrm2 * nrm2;
        cross += f.amp(1).real() * f.amp(2).real();
    }
    double beta2 = 0;
    for (double b : model.betas) beta2 += b * b;
    double target = dS * 2.0 * beta2;
    double mean = sum / n;
    double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean - target) <= 3 * se);

    // Distinct modes are uncorrelated.
    double cross_se = model.betas[0] * model.betas[1] * (dS / 2) / std::sqrt(n);
    CHECK(std::abs(cross / n) <= 3 * cross_se);
}

TEST_CASE("convolution advance") {
    spectral::SpectralGrid grid(4);

    SUBCASE("noiseless convolution decays deterministically") {
        auto z0 = spectral::single_mode(grid, 1, {1.0, 0.5});
        ConvolutionState state{z0, 0.0};
        auto zero = NoiseModel::zero(4, 1.5);
        Rng rng(3);
        for (int i = 0; i < 10; ++i)
            state = advance_convolution(state, 0.01, 0.02, zero, rng);
        auto expected = spectral::apply_semigroup(z0, 0.1);
        CHECK(spectral::h_norm(state.z - expected) <= 1e-14);
        CHECK(state.t == doctest::Approx(0.1).epsilon(1e-12));
    }

    SUBCASE("conditional variance matches the scalar recursion oracle") {
        auto model = NoiseModel::standard(4, 1.5);
        const double dt = 0.01;
        const int steps = 30, reps = 6000;
        Rng srng(11);
        std::vector<double> ds(steps);
        for (auto& v : ds) v = sample_stable_increment(dt, model.rho(), srng);

        // E|z_1|^2 given the subordinator: v <- e^{-2 lambda dt} v + beta^2 dS.
        long double expected = 0;
        const long double decay2 =
            std::exp(-2.0L * static_cast<long double>(spectral::eigenvalue(1)) * dt);
        for (int i = 0; i < steps; ++i)
            expected = decay2 * expected +
                       static_cast<long double>(model.betas[0]) * model.betas[0] * ds[i];

        Rng grng(12);
        double sum = 0, sumsq = 0;
        for (int r = 0; r < reps; ++r) {
            ConvolutionState st{spectral::Field(grid), 0.0};
            for (int i = 0; i < steps; ++i)
                st = advance_convolution(st, dt, ds[i], model, grng);
            double v = std::norm(st.z.amp(1));
            sum += v;
            sumsq += v * v;
        }
        double mean = sum / reps;
        double se = std::sqrt((sumsq / reps - mean * mean) / reps);
        CHECK(std::abs(mean - static_cast<double>(expected)) <= 4 * se);
    }
}

TEST_CASE("coefficient functional k_gamma") {
    auto model = NoiseModel::standard(64, 1.5, 1.8);

    SUBCASE("divergence at the critical exponent") {
        auto kg = k_gamma(model, model.theta);  // 2(gamma - theta) = 0 >= -1
        CHECK(kg.divergent);
        CHECK(std::isinf(kg.value));
        auto edge = k_gamma(model, model.theta - 0.5);  // exponent exactly -1
        CHECK(edge.divergent);
    }

    SUBCASE("finite value against a high-precision partial-sum oracle") {
        const double gamma = 1.0;
        auto kg = k_gamma(model, gamma);
        CHECK(!kg.divergent);

        // Brute force to K = 10^6 plus a midpoint integral remainder.
        const double expo = 2.0 * (gamma - model.theta);  // -1.6
        const double pref =
            std::pow(4.0 * std::numbers::pi * std::numbers::pi, gamma - model.theta);
        long double partial = 0;
        const long K = 1000000;
        for (long k = 1; k <= K; ++k)
            partial += std::pow(static_cast<long double>(k), expo);
        long double remainder =
            std::pow(static_cast<long double>(K) + 0.5L, expo + 1.0L) / (-expo - 1.0L);
        double oracle = 2.0 * pref * static_cast<double>(partial + remainder);
        CHECK(kg.value == doctest::Approx(oracle).epsilon(1e-6));
    }

    SUBCASE("zero model gives zero") {
        auto kg = k_gamma(NoiseModel::zero(8, 1.5), 1.0);
        CHECK(kg.value == 0.0);
        CHECK(!kg.divergent);
    }
}
