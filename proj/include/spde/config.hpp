#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spde/errors.hpp"
#include "spde/integrator.hpp"

namespace spde::io {

// Flat `key = value` run configuration: one key per line, '#' starts a
// comment, unknown keys are rejected.  Flags --threads/--out/--seed override
// the config keys of the same names.
struct RunConfig {
    // simulated system
    double alpha = 1.5;
    double theta = 1.8;
    double delta_bound = 1.0;
    int mode_cutoff = 64;
    double dt = 1e-3;
    double horizon = 10.0;
    std::uint64_t seed = 20240915;
    int record_stride = 1;
    std::string scheme = "full";  // full | y_split | truncated
    double trunc_rho = 1.0;
    double x0_amp = 0.0;  // initial state: H-norm of the mode-1 field
    int x0_mode = 1;

    // ensemble / runtime
    int ensemble = 1000;
    int threads = 1;
    std::string out = "out";

    // observable panel
    double obs_clip = 10.0;
    int obs_mode = 1;
    double obs_delta = 0.5;

    // moment study
    double p = 0.3;
    std::string moment_horizons = "1,2,4";
    std::string x0_amps = "0,10,100";
    int allow_unvalidated_p = 0;

    // recurrence study
    double delta = 0.5;
    double m_level = 0;  // 0 selects the stationary percentile automatically
    int n_max = 50;
    double percentile = 0.9;
    int stationary_paths = 500;
    double stationary_horizon = 3.0;

    // occupation / ldp study
    int lambda_points = 21;
    double lambda_half_width = 0;  // 0 selects the width automatically
    double twin_x0_scale = 0.05;   // second initial measure: diffuse scale

    // tail diagnostics
    double top_fraction = 0.05;
    int z_paths = 10000;

    // control study
    double t1 = 0.5;
    double epsilon = 1e-2;
    double target_amp = 0.1;
    double start_amp = 10.0;

    // selftest
    int selftest_samples = 10000;

    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);

    // Applies one key; throws UsageError for unknown keys or bad values.
    void apply(const std::string& key, const std::string& value);

    // Every key with its current value, in fixed declaration order.
    std::vector<std::pair<std::string, std::string>> echo() const;

    sim::SimConfig sim() const;
    sim::Scheme parsed_scheme() const;
};

std::vector<double> parse_double_list(const std::string& text);

}  // namespace spde::io
