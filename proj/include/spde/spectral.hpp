#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "spde/errors.hpp"
#include "spde/rng.hpp"

namespace spde::spectral {

// Deterministic function-space layer: mean-zero real functions on the unit
// torus, represented by truncated spectral amplitudes.  A Field stores the
// complex amplitudes a_k for wavenumbers k = 1..K only; the conjugate modes
// are implicit, so the represented function
//
//   x(xi) = sum_{k=1..K} ( a_k e^{i 2 pi k xi} + conj(a_k) e^{-i 2 pi k xi} )
//
// is real by construction and mean-zero because mode 0 is never stored.

// Eigenvalue of the negative Laplacian on mode k: 4 pi^2 k^2.  Mode 0 is
// excluded from the mean-zero space.
double eigenvalue(int k);

struct SpectralGrid {
    int mode_cutoff;  // K: retained wavenumbers 1..K
    int padded_size;  // physical sample count for nonlinear products

    // padded_size is chosen as the smallest power of two >= max(4K, 6K+1),
    // so the retained modes of a cubic product are alias-free and the
    // quadrature of quartic integrands is exact.
    explicit SpectralGrid(int mode_cutoff);
    SpectralGrid(int mode_cutoff, int padded_size);

    friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;
};

class Field {
  public:
    explicit Field(const SpectralGrid& grid)
        : grid_(grid), amps_(static_cast<std::size_t>(grid.mode_cutoff)) {}

    const SpectralGrid& grid() const { return grid_; }
    int modes() const { return grid_.mode_cutoff; }

    // Amplitude of mode k, k in 1..K.
    std::complex<double> amp(int k) const { return amps_[check_index(k)]; }
    void set_amp(int k, std::complex<double> v) { amps_[check_index(k)] = v; }

    std::span<const std::complex<double>> amps() const { return amps_; }
    std::span<std::complex<double>> amps() { return amps_; }

    bool finite() const;
    bool is_zero() const;

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator*(double s, Field a) { return a *= s; }

  private:
    std::size_t check_index(int k) const;

    SpectralGrid grid_;
    std::vector<std::complex<double>> amps_;
};

// Field with a single nonzero amplitude on mode k.
Field single_mode(const SpectralGrid& grid, int k, std::complex<double> amplitude);

// Spectral inner products and norms.  sobolev_norm(x, theta) is the H_theta
// norm ( 2 sum_k lambda_k^theta |a_k|^2 )^{1/2}; theta = 0 gives the H norm
// and theta = 1 the V norm.  theta may be negative.
double h_inner(const Field& x, const Field& y);
double sobolev_norm(const Field& x, double theta);
double h_norm(const Field& x);
double v_norm(const Field& x);

// |A^sigma x|_H, i.e. sobolev_norm(x, 2 sigma).
double fractional_norm(const Field& x, double sigma);

// Heat semigroup e^{-At}: amplitude-wise decay e^{-lambda_k t}.  t >= 0.
Field apply_semigroup(const Field& x, double t);

// Mode-wise phi1 weight (1 - e^{-lambda_k dt}) / (lambda_k dt): the exact
// integral of the semigroup against a constant forcing over one step.
Field apply_phi1(const Field& x, double dt);

// Orthogonal projections onto modes 1..N and their complement, 1 <= N <= K.
Field project_low(const Field& x, int N);
Field project_high(const Field& x, int N);

// Padded physical-space workspace (FFT buffers and plans).  One instance per
// thread; all Field-level operations below use a thread-local cache, so they
// are safe to call concurrently.
class PhysicalWorkspace {
  public:
    explicit PhysicalWorkspace(const SpectralGrid& grid);
    ~PhysicalWorkspace();
    PhysicalWorkspace(const PhysicalWorkspace&) = delete;
    PhysicalWorkspace& operator=(const PhysicalWorkspace&) = delete;

    const SpectralGrid& grid() const { return grid_; }

    // Evaluates x on the padded grid, returning the internal sample buffer.
    std::span<double> synthesize(const Field& x);

    // Transforms the (possibly modified) sample buffer back to modes 1..K.
    // The zero mode is dropped; its value (the mean) is reported if asked.
    void analyze_into(Field& out, double* mean = nullptr);

  private:
    SpectralGrid grid_;
    double* real_ = nullptr;
    std::complex<double>* spec_ = nullptr;
    void* plan_fwd_ = nullptr;  // fftw_plan
    void* plan_bwd_ = nullptr;
};

PhysicalWorkspace& thread_workspace(const SpectralGrid& grid);

// Physical samples of x on the padded grid (copy).
std::vector<double> to_physical(const Field& x);

// Exact quadrature of integral x^4 over the torus (padded grid).
double l4_norm_pow4(const Field& x);

// H inner product by physical-grid quadrature; agrees with h_inner up to
// rounding (Parseval).
double h_inner_quadrature(const Field& x, const Field& y);

// Quadrature of <x - y, x^3 - y^3>; nonnegative for every pair since t^3 is
// monotone pointwise.
double cubic_monotonicity_gap(const Field& x, const Field& y);

// Reaction term x - x^3 evaluated pointwise on the padded grid, transformed
// back and truncated to modes 1..K.  The zero mode of x^3 is discarded to
// keep the result mean-zero; cubic_mean_defect reports the discarded value.
Field nonlinearity(const Field& x);
void nonlinearity_into(const Field& x, Field& out);
double cubic_mean_defect(const Field& x);

// Smooth cutoff: 1 on |z| <= 1, 0 on |z| >= 2, smoothstep in between.
double cutoff_chi(double z);

// nonlinearity(x) * chi(|x|_V / rho).  rho > 0.
Field truncated_nonlinearity(const Field& x, double rho);

// Random fields mixing light- and heavy-tailed spectra, used by the
// inequality suite and property tests.
struct RandomFieldOptions {
    double min_decay = 0.55;   // amplitude profile lambda_k^{-s}, s uniform in
    double max_decay = 1.5;    // [min_decay, max_decay]
    double heavy_prob = 0.5;   // probability of t_2 amplitudes instead of normal
    double log_scale_sd = 1.0; // lognormal overall scale
};
Field random_field(const SpectralGrid& grid, Rng& rng,
                   const RandomFieldOptions& opts = {});

// Numerical check of the standing inequality list: the two constant-free
// inequalities (the quartic interpolation bound and the energy inner-product
// bound <x, N(x)> <= 1/4) are asserted strictly; the constant-carrying ones
// are reported as max observed ratios and asserted below ratio_ceiling.
struct InequalityReport {
    int samples = 0;
    double max_innpro = 0;            // max <x, N(x)>
    double max_l4_excess = 0;         // max ( |x|_L4^4 - |x|_V^2 |x|_H^2 )
    double min_monotonicity = 0;      // min <x - y, x^3 - y^3>
    double max_ratio_grad_v = 0;      // |N(x)|_V / (|x|_V + |x|_V^3)
    double max_ratio_lip_v = 0;       // |N(x)-N(y)|_V / ((1+|x|_V^2+|y|_V^2)|x-y|_V)
    double max_ratio_lip_h = 0;       // |N(x)-N(y)|_H / ((1+|A^1/4 x|^2+|A^1/4 y|^2)|x-y|_H)
    double max_ratio_bound_h = 0;     // |N(x)|_H / (1 + |A^1/6 x|^3)
    int violations = 0;
    bool passed() const { return violations == 0; }
};

InequalityReport verify_inequality_suite(int samples, std::uint64_t rng_seed,
                                         int mode_cutoff = 64,
                                         double ratio_ceiling = 100.0,
                                         double tolerance = 1e-9);

}  // namespace spde::spectral
