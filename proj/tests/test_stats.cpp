#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spde/stats.hpp"

using namespace spde;
using namespace spde::stats;

TEST_CASE("observables") {
    spectral::SpectralGrid grid(8);
    auto x = spectral::single_mode(grid, 1, {3.0, 4.0});  // |x|_H = 5 sqrt(2)

    auto h = Observable::h_norm_obs();
    CHECK(h(x) == doctest::Approx(5.0 * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(!h.bounded());

    auto clip = Observable::clipped_h_obs(2.0);
    CHECK(clip(x) == 2.0);
    CHECK(clip.bounded());
    CHECK(clip.upper_bound() == 2.0);

    auto m1 = Observable::mode_amplitude_obs(1);
    CHECK(m1(x) == doctest::Approx(5.0).epsilon(1e-13));

    auto sd = Observable::sobolev_obs(0.5);
    CHECK(sd(x) == doctest::Approx(spectral::sobolev_norm(x, 0.5)).epsilon(1e-13));
}

TEST_CASE("occupation averages") {
    SUBCASE("constant series returns the constant exactly") {
        std::vector<double> t, v;
        for (int i = 0; i <= 200; ++i) {
            t.push_back(0.005 * i);
            v.push_back(3.25);
        }
        CHECK(occupation_average(t, v) == doctest::Approx(3.25).epsilon(1e-14));
    }
    SUBCASE("linear series integrates to the midpoint") {
        std::vector<double> t, v;
        for (int i = 0; i <= 1000; ++i) {
            t.push_back(0.001 * i);
            v.push_back(0.001 * i);
        }
        CHECK(occupation_average(t, v) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("sparse recording is rejected") {
        std::vector<double> t = {0.0, 0.5, 1.0}, v = {1.0, 1.0, 1.0};
        CHECK_THROWS_AS(occupation_average(t, v), UsageError);
    }
    SUBCASE("bounded observables stay in range") {
        std::vector<double> t, v;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0, 2);
        for (int i = 0; i <= 500; ++i) {
            t.push_back(0.002 * i);
            v.push_back(std::min(1.5, u(rng)));
        }
        double L = occupation_average(t, v);
        CHECK(L >= 0);
        CHECK(L <= 1.5);
    }
}

TEST_CASE("hitting times from integer-norm records") {
    std::vector<std::vector<double>> norms = {
        {5.0, 3.0, 0.5},        // hits level 1 at k = 3
        {0.2},                  // hits immediately
        {9.0, 8.0, 7.0, 6.0, 5.0},  // never dips below 1 in 5 units
    };

    SUBCASE("finite levels") {
        auto rec = hitting_times(norms, 1.0, 0.5, 5);
        CHECK(rec.taus == std::vector<int>{3, 1, 5});
        CHECK(rec.censored == std::vector<std::uint8_t>{0, 0, 1});
        CHECK(rec.finite_count() + rec.censored_count() == rec.size());
    }
    SUBCASE("infinite level hits at the first instant") {
        auto rec = hitting_times(norms, std::numeric_limits<double>::infinity(),
                                 0.5, 5);
        for (auto t : rec.taus) CHECK(t == 1);
    }
    SUBCASE("level zero censors everything (full-length records required)") {
        std::vector<std::vector<double>> full = {{1, 1, 1}, {2, 2, 2}};
        auto rec = hitting_times(full, 0.0, 0.5, 3);
        CHECK(rec.censored_count() == 2);
        CHECK_THROWS_AS(hitting_times(norms, 0.0, 0.5, 5), UsageError);
    }
    SUBCASE("median level puts at least half the mass at tau = 1") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<std::vector<double>> recs;
        std::vector<double> first;
        for (int i = 0; i < 1001; ++i) {
            std::vector<double> r = {u(rng), u(rng), u(rng)};
            first.push_back(r[0]);
            recs.push_back(std::move(r));
        }
        double med = quantile(first, 0.5);
        auto rec = hitting_times(recs, med, 0.5, 3);
        std::size_t at_one = 0;
        for (std::size_t i = 0; i < rec.size(); ++i)
            at_one += (rec.taus[i] == 1 && !rec.censored[i]);
        CHECK(at_one * 2 >= rec.size());
    }
}

TEST_CASE("geometric tail fits") {
    // Synthetic geometric taus with rate q.
    const double q = 0.3;
    const int M = 5000, n_max = 30;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::vector<double>> norms;
    for (int m = 0; m < M; ++m) {
        std::vector<double> r;
        for (int k = 0; k < n_max; ++k) {
            bool hit = u(rng) > q;
            r.push_back(hit ? 0.5 : 2.0);  // below level 1 = hit
            if (hit) break;
        }
        if (static_cast<int>(r.size()) < n_max && r.back() > 1.0)
            r.resize(n_max, 2.0);
        norms.push_back(std::move(r));
    }
    auto rec = hitting_times(norms, 1.0, 0.5, n_max);
    auto fit = recurrence_tail(rec);
    REQUIRE(fit.fitted);
    CHECK(fit.slope < 0);
    CHECK(fit.geometric_rate() == doctest::Approx(q).epsilon(0.15));
    CHECK(fit.r_squared >= 0.9);

    SUBCASE("tail values and bands are proper probabilities") {
        for (std::size_t i = 0; i < fit.n.size(); ++i) {
            CHECK(fit.ci_lo[i] <= fit.p_tail[i] + 1e-12);
            CHECK(fit.p_tail[i] <= fit.ci_hi[i] + 1e-12);
            CHECK(fit.ci_lo[i] >= 0);
            CHECK(fit.ci_hi[i] <= 1);
        }
    }

    SUBCASE("exponential moments against the geometric criterion") {
        double qhat = fit.geometric_rate();
        auto finite = exp_moment_tau(rec, -0.5 * std::log(qhat));
        CHECK(finite.flag == ExpMomentTau::Flag::finite);
        CHECK(finite.lower_bound > 1.0);

        auto divergent = exp_moment_tau(rec, -2.0 * std::log(qhat));
        CHECK(divergent.flag != ExpMomentTau::Flag::finite);

        auto tiny = exp_moment_tau(rec, 1e-9);
        CHECK(tiny.lower_bound == doctest::Approx(1.0).epsilon(1e-6));
        CHECK_THROWS_AS(exp_moment_tau(rec, 0.0), DomainError);
    }

    SUBCASE("degenerate record skips the fit") {
        std::vector<std::vector<double>> ones(100, std::vector<double>{0.1});
        auto r1 = hitting_times(ones, 1.0, 0.5, 10);
        auto f1 = recurrence_tail(r1);
        CHECK(!f1.fitted);
        for (double p : f1.p_tail) CHECK(p == 0.0);
        auto em = exp_moment_tau(r1, 0.7);
        CHECK(em.flag == ExpMomentTau::Flag::finite);
        CHECK(em.lower_bound == doctest::Approx(std::exp(0.7)).epsilon(1e-12));
    }

    SUBCASE("all-censored record raises") {
        std::vector<std::vector<double>> stuck(10, std::vector<double>(5, 9.0));
        auto r = hitting_times(stuck, 1.0, 0.5, 5);
        CHECK_THROWS_AS(recurrence_tail(r), EstimationError);
    }
}

TEST_CASE("empirical cumulant generating function") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> normal(0.4, 0.05);
    const double T = 10.0;
    std::vector<double> samples(2000);
    for (auto& v : samples) v = normal(rng);

    std::vector<double> grid;
    for (int k = -10; k <= 10; ++k) grid.push_back(0.2 * k);
    auto curve = scgf(samples, grid, T);

    SUBCASE("exact zero at the origin") {
        CHECK(curve.value[10] == 0.0);
        CHECK(curve.lambda[10] == 0.0);
    }
    SUBCASE("convexity of the log moment generating function") {
        for (std::size_t i = 1; i + 1 < curve.value.size(); ++i) {
            double d2 = curve.value[i + 1] - 2 * curve.value[i] + curve.value[i - 1];
            CHECK(d2 >= -1e-10);
        }
    }
    SUBCASE("derivative at zero matches the sample mean") {
        double cd = (curve.value[11] - curve.value[9]) / 0.4;
        auto s = summarize(samples);
        CHECK(std::abs(cd - s.mean) <= 3 * s.se + 1e-3);
    }
    SUBCASE("empty sample rejected") {
        std::vector<double> none;
        CHECK_THROWS_AS(scgf(none, grid, T), UsageError);
    }
}

TEST_CASE("Legendre transform") {
    SUBCASE("Gaussian pair: quadratic transforms to quadratic") {
        const double sigma2 = 0.7;
        ScgfCurve curve;
        curve.T = 1.0;
        for (int k = -10; k <= 10; ++k) {
            double lam = 0.3 * k;
            curve.lambda.push_back(lam);
            curve.value.push_back(0.5 * sigma2 * lam * lam);
            curve.ess_warning.push_back(0);
        }
        auto rate = legendre(curve);
        for (std::size_t i = 0; i < rate.r.size(); ++i) {
            double expected = rate.r[i] * rate.r[i] / (2.0 * sigma2);
            CHECK(rate.value[i] == doctest::Approx(expected).epsilon(1e-8));
            CHECK(rate.value[i] >= -1e-12);
        }
        CHECK(std::abs(rate_minimizer(rate)) <= 1e-10);
    }
    SUBCASE("flat curve gives a zero rate at zero") {
        ScgfCurve curve;
        curve.T = 1.0;
        for (int k = -5; k <= 5; ++k) {
            curve.lambda.push_back(0.1 * k);
            curve.value.push_back(0.0);
            curve.ess_warning.push_back(0);
        }
        auto rate = legendre(curve);
        for (std::size_t i = 0; i < rate.r.size(); ++i) {
            CHECK(rate.r[i] == doctest::Approx(0.0).epsilon(1e-14));
            CHECK(rate.value[i] == doctest::Approx(0.0).epsilon(1e-14));
            CHECK(rate.interior[i] == 1);
        }
    }
    SUBCASE("non-convex input is rejected") {
        ScgfCurve curve;
        curve.T = 1.0;
        curve.lambda = {-1, 0, 1};
        curve.value = {0.0, 1.0, 0.0};  // concave spike
        curve.ess_warning = {0, 0, 0};
        CHECK_THROWS_AS(legendre(curve), EstimationError);
    }
}

TEST_CASE("Hill tail index") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0, 1);

    SUBCASE("exact Pareto recovers its index") {
        const double alpha = 1.5;
        std::vector<double> x(50000);
        for (auto& v : x) v = std::pow(std::max(u(rng), 1e-300), -1.0 / alpha);
        auto est = tail_index(x, 0.05, 99, 100);
        CHECK(std::abs(est.index - alpha) <= 0.1);
        CHECK(!est.light_tail);
        CHECK(est.ci_lo <= est.index);
        CHECK(est.index <= est.ci_hi);
    }
    SUBCASE("exponential sample is flagged light-tailed") {
        // At the 2% threshold the exponential's apparent index sits near
        // -log(0.02) + 1, well above the light-tail flag.
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> x(50000);
        for (auto& v : x) v = expo(rng);
        auto est = tail_index(x, 0.02, 99, 0);
        CHECK(est.index > 4.0);
        CHECK(est.light_tail);
    }
    SUBCASE("degenerate and undersized samples are rejected") {
        std::vector<double> tiny(100, 1.0);
        CHECK_THROWS_AS(tail_index(tiny, 0.05), UsageError);
        std::vector<double> flat(1000, 1.0);
        CHECK_THROWS_AS(tail_index(flat, 0.05), EstimationError);
        std::vector<double> x(1000, 1.0);
        CHECK_THROWS_AS(tail_index(x, 0.5), UsageError);
    }
}

TEST_CASE("prefix moment stabilization dichotomy") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0, 1);
    const double alpha = 1.5;
    std::vector<double> x(20000);
    for (auto& v : x) v = std::pow(std::max(u(rng), 1e-300), -1.0 / alpha);

    auto low = prefix_moment_estimates(x, 0.8, 1);  // p < alpha: stabilizes
    CHECK(low.last_relative_change() < 0.10);
    auto high = prefix_moment_estimates(x, 2.5, 1);  // p > alpha: diverges
    CHECK(high.last_relative_change() >= 0.10);
    CHECK(high.estimates.back() > high.estimates.front());
}

TEST_CASE("summaries and quantiles") {
    std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
    auto s = summarize(v);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-12));
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK_THROWS_AS(quantile({}, 0.5), UsageError);
}
