#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spde/errors.hpp"
#include "spde/integrator.hpp"
#include "spde/spectral.hpp"

namespace spde::stats {

// Ensemble statistics: occupation averages, hitting-time machinery with
// geometric tail fits and exponential moments, empirical scaled cumulant
// generating functions with their Legendre transforms, and heavy-tail index
// estimation.

struct Observable {
    enum class Kind { h_norm, v_norm, sobolev, mode_amplitude, clipped_h, clipped_v };
    Kind kind = Kind::h_norm;
    std::string name;
    double delta = 0.5;  // sobolev order
    int mode = 1;        // mode_amplitude wavenumber
    double clip = 10.0;  // clipped kinds: c ^ |x|

    double operator()(const spectral::Field& x) const;
    bool bounded() const;
    double upper_bound() const;  // +inf for unbounded kinds

    static Observable h_norm_obs();
    static Observable v_norm_obs();
    static Observable sobolev_obs(double delta);
    static Observable mode_amplitude_obs(int k);
    static Observable clipped_h_obs(double clip);
    static Observable clipped_v_obs(double clip);
};

struct SummaryStat {
    double mean = 0;
    double se = 0;
    std::size_t n = 0;
};
SummaryStat summarize(std::span<const double> samples);

// Time average (1/T) int f(X_s) ds by trapezoidal rule over the recorded
// instants.  Requires dense recording: no gap may exceed 1% of the span.
double occupation_average(std::span<const double> times,
                          std::span<const double> values);
double occupation_average(const sim::Trajectory& traj, const Observable& f);

// Ensemble of per-trajectory time averages.
struct OccupationStats {
    double T = 0;
    std::vector<double> samples;
    SummaryStat summary;
};

// Hitting times of the sublevel set {|x|_delta <= m_level} over integer
// sampling instants k = 1..n_max.  Entries censored at n_max carry
// tau = n_max with the censor flag set (tau > n_max).
struct HittingRecord {
    double m_level = 0;
    double delta = 0.5;
    int n_max = 50;
    std::vector<int> taus;
    std::vector<std::uint8_t> censored;

    std::size_t size() const { return taus.size(); }
    std::size_t finite_count() const;
    std::size_t censored_count() const;
};

// integer_norms[m] holds |X_k|_delta for k = 1..len(m) of trajectory m; a
// prefix may stop early only once it has dipped below m_level.
HittingRecord hitting_times(const std::vector<std::vector<double>>& integer_norms,
                            double m_level, double delta, int n_max);

// Empirical tail P(tau > n) with Wilson confidence bands and a least-squares
// geometric fit of log P(tau > n) against n over the strictly positive part.
struct TailFit {
    std::vector<int> n;
    std::vector<double> p_tail, ci_lo, ci_hi;
    bool fitted = false;  // false when fewer than two positive tail points
    double slope = 0, intercept = 0, r_squared = 0;
    double geometric_rate() const;  // exp(slope)
};
TailFit recurrence_tail(const HittingRecord& record);

// Censoring-aware lower bound for E[e^{lambda tau}].  The flag combines the
// censored-mass check with the geometric-series criterion e^lambda q < 1 for
// the fitted tail rate q.
struct ExpMomentTau {
    enum class Flag { finite, divergent, not_conclusive };
    double lower_bound = 0;
    Flag flag = Flag::finite;
    double geometric_rate = 0;
    const char* flag_name() const;
};
ExpMomentTau exp_moment_tau(const HittingRecord& record, double lambda);

// Empirical scaled cumulant generating function
//   Lambda_T(lambda) = (1/T) log mean_m exp(lambda T L^{(m)}),
// with an effective-sample-size warning where one sample carries more than
// half of the exponential sum.
struct ScgfCurve {
    std::vector<double> lambda, value;
    std::vector<std::uint8_t> ess_warning;
    double T = 0;
};
ScgfCurve scgf(std::span<const double> samples, std::span<const double> lambda_grid,
               double T);

// Legendre transform J(r) = sup_lambda (lambda r - Lambda(lambda)) over the
// grid, evaluated at the curve's own central-difference slopes; interior
// marks suprema attained away from the grid boundary.
struct RateCurve {
    std::vector<double> r, value;
    std::vector<std::uint8_t> interior;
};
RateCurve legendre(const ScgfCurve& curve, double convexity_tol = 1e-10);

// Argmin of the rate curve with parabolic refinement.
double rate_minimizer(const RateCurve& curve);

// Hill estimator on the top order statistics with a bootstrap percentile
// confidence interval.  Light-tailed samples are flagged rather than trusted.
struct HillEstimate {
    double index = 0;
    double ci_lo = 0, ci_hi = 0;
    int k_used = 0;
    bool light_tail = false;
};
HillEstimate tail_index(std::span<const double> samples, double top_fraction,
                        std::uint64_t bootstrap_seed = 0, int bootstrap_rounds = 200);

// Moment estimates over nested sample prefixes (n / 2^j for j = doublings..0);
// heavy-tail divergence shows up as failure to stabilize across doublings.
struct PrefixMoments {
    std::vector<std::size_t> sizes;
    std::vector<double> estimates;
    double last_relative_change() const;
};
PrefixMoments prefix_moment_estimates(std::span<const double> samples, double p,
                                      int doublings);

// Type-7 quantile (linear interpolation) of a copy of the sample.
double quantile(std::vector<double> samples, double q);

}  // namespace spde::stats
