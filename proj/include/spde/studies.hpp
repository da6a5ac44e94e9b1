#pragma once

#include <string>
#include <vector>

#include "spde/config.hpp"
#include "spde/control.hpp"
#include "spde/stats.hpp"

namespace spde::studies {

// Ensemble studies behind the CLI subcommands.  Each driver seeds trajectory
// m of study group g from hash(master_seed, group_offset + m, stream_tag), so
// outputs are reproducible for any worker count.

// Field with the given H-norm concentrated on one mode (real amplitude).
spectral::Field mode_field(const spectral::SpectralGrid& grid, int mode,
                           double h_norm_target);

// Default bounded observable panel: clipped H-norm, one mode modulus,
// clipped V-norm.
std::vector<stats::Observable> default_panel(const io::RunConfig& cfg);

struct SimulateStudy {
    sim::Trajectory traj;
    std::vector<stats::Observable> panel;
};
SimulateStudy simulate_study(const io::RunConfig& cfg);

// Uniform-moment study: ensembles from several mode-1 initial conditions,
// estimates of E |X_T|_delta^p at each horizon.
struct MomentRow {
    std::string x0_label;
    double T = 0, p = 0, estimate = 0, se = 0;
};
struct MomentGrowth {
    std::string x0_label;
    double ratio = 0;        // estimate(T_max) / estimate(T_min)
    double limit = 0;        // (T_max / T_min) * (1 + 3 combined rel SE)
    bool ok = false;
};
struct MomentStudy {
    std::vector<MomentRow> rows;
    double first_horizon = 0;
    double ratio_across_x0 = 0;  // max/min across initial conditions at T_min
    std::vector<MomentGrowth> growth;
    bool uniformity_ok(double ceiling) const { return ratio_across_x0 <= ceiling; }
    bool growth_ok() const;
};
MomentStudy moment_estimate(const io::RunConfig& cfg);

// Twin-ensemble occupation study: time averages under two distinct initial
// measures must agree within combined Monte Carlo error.
struct TwinRow {
    std::string observable;
    stats::SummaryStat a, b;
    double diff = 0, limit = 0;
    bool ok = false;
};
struct OccupationStudy {
    double T = 0;
    std::vector<stats::Observable> panel;
    std::vector<TwinRow> rows;
    std::vector<std::vector<double>> samples_a;  // per panel observable
    std::vector<std::vector<double>> samples_b;
    bool all_ok() const;
};
OccupationStudy occupation_study(const io::RunConfig& cfg);

// Hitting-time study at integer sampling instants.
struct RecurrenceStudy {
    double m_level = 0;  // level actually used (configured or percentile)
    bool all_censored = false;
    stats::HittingRecord record;          // at m_level
    stats::HittingRecord record_doubled;  // at 2 m_level
    stats::TailFit fit, fit_doubled;
    double lambda_half = 0, lambda_double = 0;
    stats::ExpMomentTau at_half, at_double, at_double_raised;
    bool lambda_valid = false;  // geometric rate was in (0, 1)
};
RecurrenceStudy recurrence_study(const io::RunConfig& cfg);

// Projected rate-function study on the clipped H-norm observable.
struct LdpStudy {
    OccupationStudy twins;
    std::size_t observable_index = 0;
    std::vector<double> lambda_grid;
    stats::ScgfCurve curve;
    stats::RateCurve rate;
    double minimizer = 0, min_value = 0;
    stats::SummaryStat occupation_mean;
};
LdpStudy ldp_study(const io::RunConfig& cfg);

// One named check with a measured value against a target.
struct CheckRow {
    std::string name;
    double value = 0, target = 0, tolerance = 0;
    bool pass = false;
    std::string detail;
};

// Sampler validations: Laplace transform, closed-form CDF at rho = 1/2,
// self-similarity, one-step isometry, Hill on synthetic tails.
struct NoiseCheck {
    std::vector<CheckRow> rows;
    bool all_ok() const;
};
NoiseCheck noise_check(const io::RunConfig& cfg);

struct ControlStudy {
    control::ReachabilityReport coarse;  // at the configured dt
    control::ReachabilityReport fine;    // at dt / 2
    double shrink = 0;                   // coarse residual / fine residual
};
ControlStudy control_study(const io::RunConfig& cfg);

// Invariant suites across all modules; any failure is an invariant violation.
struct SelfTest {
    std::vector<CheckRow> rows;
    bool all_ok() const;
};
SelfTest selftest(const io::RunConfig& cfg);

// Ensemble of sup_{t <= T} |Z_t|_H over convolution-only paths.
std::vector<double> z_sup_ensemble(const io::RunConfig& cfg, int paths, double T);

// Per-trajectory |X_k|_delta at integer instants k = 1.., stopping once the
// norm dips to stop_level or k reaches n_max.
std::vector<std::vector<double>> integer_norm_prefixes(const io::RunConfig& cfg,
                                                       double stop_level, int n_max);

// Percentile of the stationary |X|_delta distribution from a burn-in ensemble.
double stationary_level(const io::RunConfig& cfg);

}  // namespace spde::studies
