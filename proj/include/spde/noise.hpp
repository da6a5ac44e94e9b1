#pragma once

#include <cstdint>
#include <vector>

#include "spde/errors.hpp"
#include "spde/rng.hpp"
#include "spde/spectral.hpp"

namespace spde::noise {

// Subordinated cylindrical Brownian noise: an increasing stable process S_t
// time-changes independent per-mode Brownian motions, and a diagonal
// intensity operator weights the modes.

// Per-mode intensity coefficients beta_k together with the driving stability
// index.  The admissible band is
//   delta * lambda_k^{-theta/2} <= |beta_k| <= delta^{-1} * lambda_k^{-theta'/2}
// with 3/2 < theta' <= theta < 2; the default family beta_k = lambda_k^{-theta/2}
// sits on the lower edge with delta = 1.
struct NoiseModel {
    double alpha;               // stability index, in (1, 2)
    double theta = 1.8;         // lower-edge decay exponent
    double theta_prime = 1.8;   // upper-edge decay exponent
    double delta_bound = 1.0;
    std::vector<double> betas;  // k = 1..K
    bool power_law = true;      // betas are exactly lambda_k^{-theta/2}

    static NoiseModel standard(int modes, double alpha, double theta = 1.8,
                               double delta_bound = 1.0);
    static NoiseModel with_betas(double alpha, std::vector<double> betas,
                                 double theta, double theta_prime,
                                 double delta_bound);
    // Degenerate noiseless model (beta identically zero), for deterministic
    // reference runs; exempt from the intensity band.
    static NoiseModel zero(int modes, double alpha);

    int modes() const { return static_cast<int>(betas.size()); }
    double rho() const { return alpha / 2.0; }
    void validate() const;
};

// Nondecreasing sampled trajectory of the stable subordinator on a uniform
// step grid; S_0 = 0 and every increment is strictly positive.
struct SubordinatorPath {
    double dt = 0;
    std::vector<double> increments;
    std::vector<double> cumulative;
};

// One increment of the rho-stable subordinator over a step of length dt,
// sampled by Kanter's formula.  The output's Laplace transform at eta is
// exp(-dt * eta^rho).  Requires dt > 0 and rho in (0, 1).
double sample_stable_increment(double dt, double rho, Rng& rng);

// ceil(T/dt) i.i.d. increments with running sums.
SubordinatorPath sample_path(double T, double dt, double rho, Rng& rng);

// One subordinated noise increment: independent complex Gaussian mode
// amplitudes beta_k * dW_k with Var(Re) = Var(Im) = dS/2, so each real basis
// direction carries variance dS.
spectral::Field noise_increment(const NoiseModel& model,
                                const spectral::SpectralGrid& grid, double dS,
                                Rng& rng);

// Stochastic convolution state: the running noise-only mild term.
struct ConvolutionState {
    spectral::Field z;
    double t = 0;
};

// Left-point / exponential-Euler advance of the convolution:
// z_k <- e^{-lambda_k dt} z_k + beta_k dW_k with dW_k Gaussian of variance dS
// conditional on the subordinator increment.
ConvolutionState advance_convolution(const ConvolutionState& state, double dt,
                                     double dS, const NoiseModel& model, Rng& rng);

// The coefficient functional K_gamma = sum over nonzero modes of
// lambda_k^gamma beta_k^2.  For the default power-law family the truncated
// sum is completed with an Euler-Maclaurin tail; divergence is flagged when
// the mode sum has a non-summable exponent.
struct KGamma {
    double value = 0;      // +inf when divergent
    double tail = 0;       // analytic completion beyond the stored modes
    bool divergent = false;
};
KGamma k_gamma(const NoiseModel& model, double gamma);

}  // namespace spde::noise
