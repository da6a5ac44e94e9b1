#include "spde/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace spde::spectral {

namespace {

constexpr double kTwoPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

// FFTW planning is not thread-safe; execution through distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

double eigenvalue(int k) {
    if (k == 0) throw DomainError("eigenvalue: mode 0 is excluded");
    return kTwoPiSq * static_cast<double>(k) * static_cast<double>(k);
}

SpectralGrid::SpectralGrid(int K)
    : SpectralGrid(K, next_pow2(std::max(4 * K, 6 * K + 1))) {}

SpectralGrid::SpectralGrid(int K, int padded) : mode_cutoff(K), padded_size(padded) {
    if (K < 1) throw DomainError("SpectralGrid: mode cutoff must be >= 1");
    if (padded < 6 * K + 1 || padded < 4 * K)
        throw DomainError("SpectralGrid: padded size too small for alias-free cubics");
}

std::size_t Field::check_index(int k) const {
    if (k < 1 || k > grid_.mode_cutoff)
        throw DomainError("Field: mode index outside 1..K");
    return static_cast<std::size_t>(k - 1);
}

bool Field::finite() const {
    for (const auto& a : amps_)
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    return true;
}

bool Field::is_zero() const {
    for (const auto& a : amps_)
        if (a != std::complex<double>{}) return false;
    return true;
}

Field& Field::operator+=(const Field& o) {
    if (!(grid_ == o.grid_)) throw DomainError("Field: grid mismatch");
    for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] += o.amps_[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    if (!(grid_ == o.grid_)) throw DomainError("Field: grid mismatch");
    for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] -= o.amps_[i];
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& a : amps_) a *= s;
    return *this;
}

Field single_mode(const SpectralGrid& grid, int k, std::complex<double> amplitude) {
    Field f(grid);
    f.set_amp(k, amplitude);
    return f;
}

double h_inner(const Field& x, const Field& y) {
    if (!(x.grid() == y.grid())) throw DomainError("h_inner: grid mismatch");
    double s = 0;
    auto ax = x.amps(), ay = y.amps();
    for (std::size_t i = 0; i < ax.size(); ++i)
        s += ax[i].real() * ay[i].real() + ax[i].imag() * ay[i].imag();
    return 2.0 * s;
}

double sobolev_norm(const Field& x, double theta) {
    double s = 0;
    auto a = x.amps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double lam = kTwoPiSq * static_cast<double>(i + 1) * static_cast<double>(i + 1);
        s += std::pow(lam, theta) * std::norm(a[i]);
    }
    return std::sqrt(2.0 * s);
}

double h_norm(const Field& x) {
    double s = 0;
    for (const auto& a : x.amps()) s += std::norm(a);
    return std::sqrt(2.0 * s);
}

double v_norm(const Field& x) {
    double s = 0;
    auto a = x.amps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double lam = kTwoPiSq * static_cast<double>(i + 1) * static_cast<double>(i + 1);
        s += lam * std::norm(a[i]);
    }
    return std::sqrt(2.0 * s);
}

double fractional_norm(const Field& x, double sigma) {
    return sobolev_norm(x, 2.0 * sigma);
}

Field apply_semigroup(const Field& x, double t) {
    if (t < 0) throw DomainError("apply_semigroup: negative time");
    if (t == 0) return x;
    Field out = x;
    auto a = out.amps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double lam = kTwoPiSq * static_cast<double>(i + 1) * static_cast<double>(i + 1);
        a[i] *= std::exp(-lam * t);
    }
    return out;
}

Field apply_phi1(const Field& x, double dt) {
    if (dt <= 0) throw DomainError("apply_phi1: step must be positive");
    Field out = x;
    auto a = out.amps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double lam = kTwoPiSq * static_cast<double>(i + 1) * static_cast<double>(i + 1);
        a[i] *= -std::expm1(-lam * dt) / (lam * dt);
    }
    return out;
}

Field project_low(const Field& x, int N) {
    if (N < 1 || N > x.modes()) throw DomainError("project_low: N outside 1..K");
    Field out = x;
    auto a = out.amps();
    for (std::size_t i = static_cast<std::size_t>(N); i < a.size(); ++i) a[i] = 0;
    return out;
}

Field project_high(const Field& x, int N) {
    if (N < 1 || N > x.modes()) throw DomainError("project_high: N outside 1..K");
    Field out(x.grid());
    auto a = out.amps();
    auto src = x.amps();
    for (std::size_t i = static_cast<std::size_t>(N); i < a.size(); ++i) a[i] = src[i];
    return out;
}

PhysicalWorkspace::PhysicalWorkspace(const SpectralGrid& grid) : grid_(grid) {
    const int P = grid.padded_size;
    std::lock_guard<std::mutex> lock(planner_mutex());
    real_ = fftw_alloc_real(static_cast<std::size_t>(P));
    spec_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(static_cast<std::size_t>(P / 2 + 1)));
    plan_bwd_ = fftw_plan_dft_c2r_1d(P, reinterpret_cast<fftw_complex*>(spec_), real_,
                                     FFTW_ESTIMATE);
    plan_fwd_ = fftw_plan_dft_r2c_1d(P, real_, reinterpret_cast<fftw_complex*>(spec_),
                                     FFTW_ESTIMATE);
}

PhysicalWorkspace::~PhysicalWorkspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(real_);
    fftw_free(spec_);
}

std::span<double> PhysicalWorkspace::synthesize(const Field& x) {
    if (!(x.grid() == grid_)) throw DomainError("workspace: grid mismatch");
    const int half = grid_.padded_size / 2 + 1;
    std::fill(spec_, spec_ + half, std::complex<double>{});
    auto a = x.amps();
    for (std::size_t i = 0; i < a.size(); ++i) spec_[i + 1] = a[i];
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    return {real_, static_cast<std::size_t>(grid_.padded_size)};
}

void PhysicalWorkspace::analyze_into(Field& out, double* mean) {
    if (!(out.grid() == grid_)) throw DomainError("workspace: grid mismatch");
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    const double inv = 1.0 / static_cast<double>(grid_.padded_size);
    if (mean) *mean = spec_[0].real() * inv;
    auto a = out.amps();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = spec_[i + 1] * inv;
}

PhysicalWorkspace& thread_workspace(const SpectralGrid& grid) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<PhysicalWorkspace>> cache;
    auto key = std::make_pair(grid.mode_cutoff, grid.padded_size);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<PhysicalWorkspace>(grid)).first;
    return *it->second;
}

std::vector<double> to_physical(const Field& x) {
    auto s = thread_workspace(x.grid()).synthesize(x);
    return {s.begin(), s.end()};
}

double l4_norm_pow4(const Field& x) {
    auto& ws = thread_workspace(x.grid());
    auto u = ws.synthesize(x);
    double s = 0;
    for (double v : u) {
        double v2 = v * v;
        s += v2 * v2;
    }
    return s / static_cast<double>(u.size());
}

double h_inner_quadrature(const Field& x, const Field& y) {
    if (!(x.grid() == y.grid())) throw DomainError("h_inner_quadrature: grid mismatch");
    auto ux = to_physical(x);
    auto uy = to_physical(y);
    double s = 0;
    for (std::size_t i = 0; i < ux.size(); ++i) s += ux[i] * uy[i];
    return s / static_cast<double>(ux.size());
}

double cubic_monotonicity_gap(const Field& x, const Field& y) {
    if (!(x.grid() == y.grid()))
        throw DomainError("cubic_monotonicity_gap: grid mismatch");
    auto ux = to_physical(x);
    auto uy = to_physical(y);
    double s = 0;
    for (std::size_t i = 0; i < ux.size(); ++i) {
        double a = ux[i], b = uy[i];
        s += (a - b) * (a * a * a - b * b * b);
    }
    return s / static_cast<double>(ux.size());
}

namespace {

// Shared core of nonlinearity / cubic_mean_defect.
void reaction_on_grid(const Field& x, Field& out, double* mean) {
    auto& ws = thread_workspace(x.grid());
    auto u = ws.synthesize(x);
    bool ok = true;
    for (double& v : u) {
        double w = v - v * v * v;
        ok = ok && std::isfinite(w);
        v = w;
    }
    if (!ok) throw NumericalError("nonlinearity: cubic overflowed on the grid");
    ws.analyze_into(out, mean);
}

}  // namespace

Field nonlinearity(const Field& x) {
    Field out(x.grid());
    reaction_on_grid(x, out, nullptr);
    return out;
}

void nonlinearity_into(const Field& x, Field& out) {
    reaction_on_grid(x, out, nullptr);
}

double cubic_mean_defect(const Field& x) {
    double mean = 0;
    Field out(x.grid());
    reaction_on_grid(x, out, &mean);
    return mean;
}

double cutoff_chi(double z) {
    double az = std::abs(z);
    if (az <= 1.0) return 1.0;
    if (az >= 2.0) return 0.0;
    double w = az - 1.0;
    return 1.0 - w * w * (3.0 - 2.0 * w);
}

Field truncated_nonlinearity(const Field& x, double rho) {
    if (rho <= 0) throw DomainError("truncated_nonlinearity: rho must be positive");
    double chi = cutoff_chi(v_norm(x) / rho);
    if (chi == 0.0) return Field(x.grid());
    Field n = nonlinearity(x);
    return n *= chi;
}

Field random_field(const SpectralGrid& grid, Rng& rng, const RandomFieldOptions& opts) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    const double s = opts.min_decay + (opts.max_decay - opts.min_decay) * unif(rng);
    const bool heavy = unif(rng) < opts.heavy_prob;
    const double scale = std::exp(opts.log_scale_sd * normal(rng));

    Field f(grid);
    auto a = f.amps();
    for (std::size_t i = 0; i < a.size(); ++i) {
        double lam = kTwoPiSq * static_cast<double>(i + 1) * static_cast<double>(i + 1);
        double sigma = std::pow(lam, -s);
        double re = normal(rng), im = normal(rng);
        if (heavy) {
            // t_2 amplitudes: normal over sqrt of an independent exponential.
            double g = std::max(expo(rng), 1e-300);
            double root = std::sqrt(g);
            re /= root;
            im /= root;
        }
        a[i] = scale * sigma * std::complex<double>(re, im) / std::numbers::sqrt2;
    }
    return f;
}

InequalityReport verify_inequality_suite(int samples, std::uint64_t rng_seed,
                                         int mode_cutoff, double ratio_ceiling,
                                         double tolerance) {
    if (samples < 1) throw DomainError("verify_inequality_suite: samples must be >= 1");
    SpectralGrid grid(mode_cutoff);
    Rng rng = make_rng(rng_seed, 0, stream::synthetic);

    InequalityReport rep;
    rep.samples = samples;
    rep.min_monotonicity = std::numeric_limits<double>::infinity();

    Field prev(grid);
    for (int i = 0; i < samples; ++i) {
        Field x = random_field(grid, rng);
        Field nx = nonlinearity(x);

        const double xh = h_norm(x), xv = v_norm(x);
        // Quadrature route: l4 and <x, N(x)> = integral of u^2 - u^4, whose
        // integrand is pointwise <= 1/4.
        double l4 = 0, innpro = 0;
        {
            auto u = thread_workspace(grid).synthesize(x);
            for (double v : u) {
                double v2 = v * v;
                l4 += v2 * v2;
                innpro += v2 - v2 * v2;
            }
            l4 /= static_cast<double>(u.size());
            innpro /= static_cast<double>(u.size());
        }
        const double vh = xv * xv * xh * xh;

        rep.max_innpro = std::max(rep.max_innpro, innpro);
        rep.max_l4_excess = std::max(rep.max_l4_excess, l4 - vh);
        if (innpro > 0.25 + tolerance) ++rep.violations;
        if (l4 - vh > tolerance * std::max(1.0, vh)) ++rep.violations;

        if (xv > 0) {
            double r = v_norm(nx) / (xv + xv * xv * xv);
            rep.max_ratio_grad_v = std::max(rep.max_ratio_grad_v, r);
            if (r > ratio_ceiling) ++rep.violations;
        }
        {
            double denom = 1.0 + std::pow(fractional_norm(x, 1.0 / 6.0), 3.0);
            double r = h_norm(nx) / denom;
            rep.max_ratio_bound_h = std::max(rep.max_ratio_bound_h, r);
            if (r > ratio_ceiling) ++rep.violations;
        }

        if (i > 0) {
            const Field& y = prev;
            Field ny = nonlinearity(y);
            Field dxy = x - y;
            double dv = v_norm(dxy), dh = h_norm(dxy);
            Field dn = nx - ny;
            if (dv > 0) {
                double yv = v_norm(y);
                double r = v_norm(dn) / ((1.0 + xv * xv + yv * yv) * dv);
                rep.max_ratio_lip_v = std::max(rep.max_ratio_lip_v, r);
                if (r > ratio_ceiling) ++rep.violations;
            }
            if (dh > 0) {
                double qx = fractional_norm(x, 0.25), qy = fractional_norm(y, 0.25);
                double r = h_norm(dn) / ((1.0 + qx * qx + qy * qy) * dh);
                rep.max_ratio_lip_h = std::max(rep.max_ratio_lip_h, r);
                if (r > ratio_ceiling) ++rep.violations;
            }
            double gap = cubic_monotonicity_gap(x, y);
            rep.min_monotonicity = std::min(rep.min_monotonicity, gap);
            if (gap < -tolerance) ++rep.violations;
        }
        prev = x;
    }
    if (samples == 1) rep.min_monotonicity = 0;

    if (rep.violations > 0)
        throw InvariantViolation("inequality suite: " + std::to_string(rep.violations) +
                                 " violation(s) over " + std::to_string(samples) +
                                 " samples");
    return rep;
}

}  // namespace spde::spectral
