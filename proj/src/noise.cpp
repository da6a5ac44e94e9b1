#include "spde/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace spde::noise {

namespace {
constexpr double kUlp = std::numeric_limits<double>::epsilon();
}

NoiseModel NoiseModel::standard(int modes, double alpha, double theta,
                                double delta_bound) {
    NoiseModel m;
    m.alpha = alpha;
    m.theta = theta;
    m.theta_prime = theta;
    m.delta_bound = delta_bound;
    m.power_law = true;
    m.betas.resize(static_cast<std::size_t>(modes));
    for (int k = 1; k <= modes; ++k)
        m.betas[static_cast<std::size_t>(k - 1)] =
            std::pow(spectral::eigenvalue(k), -theta / 2.0);
    m.validate();
    return m;
}

NoiseModel NoiseModel::with_betas(double alpha, std::vector<double> betas,
                                  double theta, double theta_prime,
                                  double delta_bound) {
    NoiseModel m;
    m.alpha = alpha;
    m.theta = theta;
    m.theta_prime = theta_prime;
    m.delta_bound = delta_bound;
    m.betas = std::move(betas);
    m.power_law = false;
    m.validate();
    return m;
}

NoiseModel NoiseModel::zero(int modes, double alpha) {
    NoiseModel m;
    m.alpha = alpha;
    m.power_law = false;
    m.betas.assign(static_cast<std::size_t>(modes), 0.0);
    m.validate();
    return m;
}

void NoiseModel::validate() const {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw DomainError("NoiseModel: alpha must lie in (1, 2)");
    if (betas.empty()) throw DomainError("NoiseModel: no modes");
    bool all_zero = true;
    for (double b : betas) all_zero = all_zero && b == 0.0;
    if (all_zero) return;  // degenerate noiseless model
    if (!(theta_prime > 1.5 && theta_prime <= theta && theta < 2.0))
        throw DomainError("NoiseModel: need 3/2 < theta' <= theta < 2");
    if (!(delta_bound > 0)) throw DomainError("NoiseModel: delta must be positive");
    const double slack = 1 + 1e-12;
    for (int k = 1; k <= modes(); ++k) {
        double lam = spectral::eigenvalue(k);
        double lo = delta_bound * std::pow(lam, -theta / 2.0);
        double hi = std::pow(lam, -theta_prime / 2.0) / delta_bound;
        double b = std::abs(betas[static_cast<std::size_t>(k - 1)]);
        if (b * slack < lo || b > hi * slack)
            throw DomainError("NoiseModel: beta_" + std::to_string(k) +
                              " outside the admissible band");
    }
}

double sample_stable_increment(double dt, double rho, Rng& rng) {
    if (!(dt > 0)) throw DomainError("sample_stable_increment: dt must be positive");
    if (!(rho > 0 && rho < 1))
        throw DomainError("sample_stable_increment: rho must lie in (0, 1)");

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    // Guards keep the Kanter formula away from 0/0 at the interval ends.
    double u = std::min(std::max(unif(rng), kUlp), 1.0 - kUlp);
    double e = std::max(expo(rng), kUlp);

    const double pu = std::numbers::pi * u;
    double s = std::sin(rho * pu) / std::pow(std::sin(pu), 1.0 / rho) *
               std::pow(std::sin((1.0 - rho) * pu) / e, (1.0 - rho) / rho);
    return std::pow(dt, 1.0 / rho) * s;
}

SubordinatorPath sample_path(double T, double dt, double rho, Rng& rng) {
    if (!(T >= dt && dt > 0)) throw DomainError("sample_path: need T >= dt > 0");
    SubordinatorPath path;
    path.dt = dt;
    auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    path.increments.reserve(n);
    path.cumulative.reserve(n);
    double run = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double inc = sample_stable_increment(dt, rho, rng);
        run += inc;
        path.increments.push_back(inc);
        path.cumulative.push_back(run);
    }
    return path;
}

spectral::Field noise_increment(const NoiseModel& model,
                                const spectral::SpectralGrid& grid, double dS,
                                Rng& rng) {
    if (!(dS > 0)) throw DomainError("noise_increment: dS must be positive");
    if (grid.mode_cutoff > model.modes())
        throw DomainError("noise_increment: model has fewer modes than the grid");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(dS / 2.0);
    spectral::Field f(grid);
    auto a = f.amps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        // Sequenced draws: real part first, then imaginary.
        double re = normal(rng);
        double im = normal(rng);
        a[i] = model.betas[i] * std::complex<double>(sd * re, sd * im);
    }
    return f;
}

ConvolutionState advance_convolution(const ConvolutionState& state, double dt,
                                     double dS, const NoiseModel& model, Rng& rng) {
    if (!(dt > 0)) throw DomainError("advance_convolution: dt must be positive");
    ConvolutionState next{spectral::apply_semigroup(state.z, dt), state.t + dt};
    next.z += noise_increment(model, state.z.grid(), dS, rng);
    return next;
}

namespace {

// Tail sum_{k > K} k^{-s} for s > 1 by Euler-Maclaurin (three terms); the
// remainder is O(K^{-s-3}), negligible for K >= 8.
double power_tail(int K, double s) {
    double a = static_cast<double>(K) + 1.0;
    double lead = std::pow(a, 1.0 - s) / (s - 1.0);
    double half = 0.5 * std::pow(a, -s);
    double deriv = s * std::pow(a, -s - 1.0) / 12.0;
    return lead + half + deriv;
}

}  // namespace

KGamma k_gamma(const NoiseModel& model, double gamma) {
    KGamma out;
    double partial = 0;
    for (int k = 1; k <= model.modes(); ++k) {
        double b = model.betas[static_cast<std::size_t>(k - 1)];
        partial += std::pow(spectral::eigenvalue(k), gamma) * b * b;
    }
    out.value = 2.0 * partial;

    if (model.power_law) {
        // beta_k^2 lambda_k^gamma = (4 pi^2)^{gamma - theta} k^{2(gamma - theta)}.
        const double expo = 2.0 * (gamma - model.theta);
        if (expo >= -1.0) {
            out.divergent = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        const double pref =
            std::pow(4.0 * std::numbers::pi * std::numbers::pi, gamma - model.theta);
        out.tail = 2.0 * pref * power_tail(model.modes(), -expo);
        out.value += out.tail;
    }
    return out;
}

}  // namespace spde::noise
