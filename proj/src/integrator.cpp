#include "spde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spde::sim {

namespace {

long steps_for(double T, double dt) {
    return static_cast<long>(std::ceil(T / dt - 1e-12));
}

// Per-mode semigroup and phi1 factors for one (grid, dt).
struct StepFactors {
    std::vector<double> decay;   // e^{-lambda_k dt}
    std::vector<double> phi1dt;  // (1 - e^{-lambda_k dt}) / lambda_k

    StepFactors(int modes, double dt) {
        decay.resize(static_cast<std::size_t>(modes));
        phi1dt.resize(static_cast<std::size_t>(modes));
        for (int k = 1; k <= modes; ++k) {
            double lam = spectral::eigenvalue(k);
            double em = std::expm1(-lam * dt);
            decay[static_cast<std::size_t>(k - 1)] = 1.0 + em;
            phi1dt[static_cast<std::size_t>(k - 1)] = -em / lam;
        }
    }
};

// Streams intensity-weighted noise increments in the canonical draw order:
// one subordinator increment, then per mode the real and imaginary Gaussian
// parts.  Replay sources read the same data back from a realization.
class NoiseSourceBase {
  public:
    virtual ~NoiseSourceBase() = default;
    virtual double next_dS() = 0;
    virtual void next_dW(std::span<std::complex<double>> out) = 0;
};

class RngNoiseSource final : public NoiseSourceBase {
  public:
    RngNoiseSource(const noise::NoiseModel& model, double dt, Rng sub, Rng gauss)
        : model_(model), dt_(dt), sub_(sub), gauss_(gauss) {}

    double next_dS() override {
        last_dS_ = noise::sample_stable_increment(dt_, model_.rho(), sub_);
        return last_dS_;
    }

    void next_dW(std::span<std::complex<double>> out) override {
        const double sd = std::sqrt(last_dS_ / 2.0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            double re = normal_(gauss_);
            double im = normal_(gauss_);
            out[i] = model_.betas[i] * std::complex<double>(sd * re, sd * im);
        }
    }

  private:
    const noise::NoiseModel& model_;
    double dt_;
    Rng sub_, gauss_;
    double last_dS_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

class ReplayNoiseSource final : public NoiseSourceBase {
  public:
    explicit ReplayNoiseSource(const NoiseRealization& r) : r_(r) {}

    double next_dS() override { return r_.dS[static_cast<std::size_t>(step_)]; }

    void next_dW(std::span<std::complex<double>> out) override {
        const auto base = static_cast<std::size_t>(step_) *
                          static_cast<std::size_t>(r_.modes);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = r_.dW[base + i];
        ++step_;
    }

  private:
    const NoiseRealization& r_;
    long step_ = 0;
};

// Attaches the failing step index to overflow raised inside the reaction.
template <typename F>
void checked_step(long step, F&& body) {
    try {
        body();
    } catch (const NumericalError& e) {
        if (e.step_index >= 0) throw;
        throw NumericalError(e.what(), step);
    }
}

struct Recorder {
    const SimConfig& config;
    const RecordSpec& spec;
    Trajectory traj;

    Recorder(const SimConfig& cfg, const RecordSpec& rec) : config(cfg), spec(rec) {
        traj.custom_names.reserve(rec.customs.size());
        for (const auto& [name, fn] : rec.customs) traj.custom_names.push_back(name);
        traj.custom.resize(rec.customs.size());
    }

    void push(double t, const spectral::Field& x) {
        traj.times.push_back(t);
        traj.h_norm.push_back(spectral::h_norm(x));
        traj.v_norm.push_back(spectral::v_norm(x));
        traj.delta_norm.push_back(spectral::sobolev_norm(x, config.observable_delta));
        for (std::size_t j = 0; j < spec.customs.size(); ++j)
            traj.custom[j].push_back(spec.customs[j].second(x));
        if (config.record_states) traj.states.push_back(x);
    }

    bool due(long i, long n) const {
        return i % config.record_stride == 0 || i == n;
    }
};

}  // namespace

void SimConfig::validate() const {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw DomainError("SimConfig: alpha must lie in (1, 2)");
    if (!(dt > 0)) throw DomainError("SimConfig: dt must be positive");
    if (!(horizon >= dt)) throw DomainError("SimConfig: horizon must be >= dt");
    if (mode_cutoff < 1) throw DomainError("SimConfig: mode cutoff must be >= 1");
    if (record_stride < 1) throw DomainError("SimConfig: record stride must be >= 1");
    if (scheme == Scheme::truncated && !(trunc_rho > 0))
        throw DomainError("SimConfig: truncation radius must be positive");
}

spectral::SpectralGrid SimConfig::grid() const {
    return spectral::SpectralGrid(mode_cutoff);
}

noise::NoiseModel SimConfig::noise_model() const {
    return zero_noise
               ? noise::NoiseModel::zero(mode_cutoff, alpha)
               : noise::NoiseModel::standard(mode_cutoff, alpha, theta, delta_bound);
}

long SimConfig::step_count() const { return steps_for(horizon, dt); }

NoiseRealization draw_noise(const SimConfig& config, long steps) {
    config.validate();
    auto model = config.noise_model();
    RngNoiseSource src(model, config.dt,
                       make_rng(config.seed, config.trajectory_index,
                                stream::subordinator),
                       make_rng(config.seed, config.trajectory_index,
                                stream::gaussian));
    NoiseRealization out;
    out.dt = config.dt;
    out.modes = config.mode_cutoff;
    out.steps = steps;
    out.dS.resize(static_cast<std::size_t>(steps));
    out.dW.resize(static_cast<std::size_t>(steps) *
                  static_cast<std::size_t>(config.mode_cutoff));
    for (long i = 0; i < steps; ++i) {
        out.dS[static_cast<std::size_t>(i)] = src.next_dS();
        src.next_dW({out.dW.data() + static_cast<std::size_t>(i) *
                                          static_cast<std::size_t>(config.mode_cutoff),
                     static_cast<std::size_t>(config.mode_cutoff)});
    }
    return out;
}

NoiseRealization coarsen(const NoiseRealization& fine, int factor) {
    if (factor < 1 || fine.steps % factor != 0)
        throw DomainError("coarsen: steps must be divisible by the factor");
    NoiseRealization out;
    out.dt = fine.dt * factor;
    out.modes = fine.modes;
    out.steps = fine.steps / factor;
    out.dS.assign(static_cast<std::size_t>(out.steps), 0.0);
    out.dW.assign(static_cast<std::size_t>(out.steps) *
                      static_cast<std::size_t>(out.modes),
                  {});
    for (long i = 0; i < fine.steps; ++i) {
        long j = i / factor;
        out.dS[static_cast<std::size_t>(j)] += fine.dS[static_cast<std::size_t>(i)];
        for (int k = 0; k < fine.modes; ++k)
            out.dW[static_cast<std::size_t>(j) * out.modes + k] +=
                fine.dW[static_cast<std::size_t>(i) * fine.modes + k];
    }
    return out;
}

spectral::Field step_mild(const spectral::Field& x, double dt,
                          const spectral::Field& z_inc) {
    if (!(dt > 0)) throw DomainError("step_mild: dt must be positive");
    StepFactors f(x.modes(), dt);
    spectral::Field n = spectral::nonlinearity(x);
    spectral::Field out = x;
    auto xo = out.amps();
    auto na = n.amps();
    auto za = z_inc.amps();
    for (std::size_t i = 0; i < xo.size(); ++i)
        xo[i] = f.decay[i] * xo[i] + f.phi1dt[i] * na[i] + za[i];
    return out;
}

SimulateOutput simulate_ex(const SimConfig& config, const spectral::Field& x0,
                           const SimulateOptions& options) {
    config.validate();
    const auto grid = config.grid();
    if (!(x0.grid() == grid)) throw DomainError("simulate: initial state grid mismatch");
    if (!x0.finite()) throw NumericalError("simulate: non-finite initial state");
    const auto model = config.noise_model();
    const long n = config.step_count();
    if (options.replay) {
        if (options.replay->steps < n || options.replay->modes != config.mode_cutoff ||
            options.replay->dt != config.dt)
            throw DomainError("simulate: replay realization does not match config");
    }

    RngNoiseSource rng_src(
        model, config.dt,
        make_rng(config.seed, config.trajectory_index, stream::subordinator),
        make_rng(config.seed, config.trajectory_index, stream::gaussian));
    static const NoiseRealization kNoReplay{};
    ReplayNoiseSource replay_src(options.replay ? *options.replay : kNoReplay);
    NoiseSourceBase& src =
        options.replay ? static_cast<NoiseSourceBase&>(replay_src)
                       : static_cast<NoiseSourceBase&>(rng_src);

    const StepFactors fac(config.mode_cutoff, config.dt);
    const bool split = config.scheme == Scheme::y_split;
    const bool track_z = options.keep_z || split;

    spectral::Field x = x0;          // full scheme state
    spectral::Field y = x0;          // shifted state (split scheme)
    spectral::Field z(grid);         // convolution
    spectral::Field nbuf(grid);      // reaction buffer
    spectral::Field wbuf(grid);      // split-scheme argument y + z
    std::vector<std::complex<double>> dw(static_cast<std::size_t>(config.mode_cutoff));

    SimulateOutput out;
    Recorder rec(config, options.record);
    rec.push(0.0, x);
    if (options.keep_z) {
        out.z_path.reserve(static_cast<std::size_t>(n));
    }

    for (long i = 1; i <= n; ++i) {
        if (options.keep_z) out.z_path.push_back(z);

        src.next_dS();
        src.next_dW(dw);

        if (split) {
            wbuf = y;
            wbuf += z;
            checked_step(i, [&] {
                if (config.scheme == Scheme::truncated)
                    nbuf = spectral::truncated_nonlinearity(wbuf, config.trunc_rho);
                else
                    spectral::nonlinearity_into(wbuf, nbuf);
            });
            auto ya = y.amps();
            auto za = z.amps();
            auto na = nbuf.amps();
            for (std::size_t k = 0; k < ya.size(); ++k) {
                ya[k] = fac.decay[k] * ya[k] + fac.phi1dt[k] * na[k];
                za[k] = fac.decay[k] * za[k] + dw[k];
            }
            x = y;
            x += z;
        } else {
            checked_step(i, [&] {
                if (config.scheme == Scheme::truncated)
                    nbuf = spectral::truncated_nonlinearity(x, config.trunc_rho);
                else
                    spectral::nonlinearity_into(x, nbuf);
            });
            auto xa = x.amps();
            auto na = nbuf.amps();
            for (std::size_t k = 0; k < xa.size(); ++k)
                xa[k] = fac.decay[k] * xa[k] + fac.phi1dt[k] * na[k] + dw[k];
            if (track_z) {
                auto za = z.amps();
                for (std::size_t k = 0; k < za.size(); ++k)
                    za[k] = fac.decay[k] * za[k] + dw[k];
            }
        }

        if (!x.finite())
            throw NumericalError("simulate: state became non-finite", i);

        if (track_z)
            out.sup_z_vnorm = std::max(out.sup_z_vnorm, spectral::v_norm(z));

        double t = static_cast<double>(i) * config.dt;
        if (rec.due(i, n)) rec.push(t, x);
        out.steps_run = i;
        if (options.observer &&
            options.observer(i, t, x) == StepControl::stop)
            break;
    }

    out.trajectory = std::move(rec.traj);
    return out;
}

Trajectory simulate(const SimConfig& config, const spectral::Field& x0,
                    const RecordSpec& record) {
    SimulateOptions opts;
    opts.record = record;
    return simulate_ex(config, x0, opts).trajectory;
}

std::pair<Trajectory, Trajectory> simulate_pair_synchronous(
    const SimConfig& config, const spectral::Field& x0,
    const spectral::Field& y0) {
    config.validate();
    const auto grid = config.grid();
    if (!(x0.grid() == grid) || !(y0.grid() == grid))
        throw DomainError("simulate_pair_synchronous: grid mismatch");
    const auto model = config.noise_model();
    const long n = config.step_count();

    RngNoiseSource src(
        model, config.dt,
        make_rng(config.seed, config.trajectory_index, stream::subordinator),
        make_rng(config.seed, config.trajectory_index, stream::gaussian));
    const StepFactors fac(config.mode_cutoff, config.dt);

    spectral::Field a = x0, b = y0, nbuf(grid);
    std::vector<std::complex<double>> dw(static_cast<std::size_t>(config.mode_cutoff));

    RecordSpec none;
    Recorder ra(config, none), rb(config, none);
    ra.push(0.0, a);
    rb.push(0.0, b);

    for (long i = 1; i <= n; ++i) {
        src.next_dS();
        src.next_dW(dw);
        checked_step(i, [&] { spectral::nonlinearity_into(a, nbuf); });
        {
            auto xa = a.amps();
            auto na = nbuf.amps();
            for (std::size_t k = 0; k < xa.size(); ++k)
                xa[k] = fac.decay[k] * xa[k] + fac.phi1dt[k] * na[k] + dw[k];
        }
        checked_step(i, [&] { spectral::nonlinearity_into(b, nbuf); });
        {
            auto xb = b.amps();
            auto na = nbuf.amps();
            for (std::size_t k = 0; k < xb.size(); ++k)
                xb[k] = fac.decay[k] * xb[k] + fac.phi1dt[k] * na[k] + dw[k];
        }
        if (!a.finite() || !b.finite())
            throw NumericalError("simulate_pair_synchronous: non-finite state", i);
        if (ra.due(i, n)) {
            double t = static_cast<double>(i) * config.dt;
            ra.push(t, a);
            rb.push(t, b);
        }
    }
    return {std::move(ra.traj), std::move(rb.traj)};
}

Trajectory solve_shifted(const SimConfig& config, const spectral::Field& x0,
                         std::span<const spectral::Field> z_path,
                         const RecordSpec& record) {
    config.validate();
    const auto grid = config.grid();
    if (!(x0.grid() == grid)) throw DomainError("solve_shifted: grid mismatch");
    const long n = config.step_count();
    if (static_cast<long>(z_path.size()) < n)
        throw DomainError("solve_shifted: convolution path shorter than the step grid");

    const StepFactors fac(config.mode_cutoff, config.dt);
    spectral::Field y = x0, nbuf(grid), wbuf(grid);

    Recorder rec(config, record);
    rec.push(0.0, y);
    for (long i = 1; i <= n; ++i) {
        wbuf = y;
        wbuf += z_path[static_cast<std::size_t>(i - 1)];
        checked_step(i, [&] { spectral::nonlinearity_into(wbuf, nbuf); });
        auto ya = y.amps();
        auto na = nbuf.amps();
        for (std::size_t k = 0; k < ya.size(); ++k)
            ya[k] = fac.decay[k] * ya[k] + fac.phi1dt[k] * na[k];
        if (!y.finite()) throw NumericalError("solve_shifted: non-finite state", i);
        if (rec.due(i, n)) rec.push(static_cast<double>(i) * config.dt, y);
    }
    return std::move(rec.traj);
}

Trajectory solve_deterministic(const spectral::Field& x0,
                               std::span<const spectral::Field> u_steps,
                               double T, double dt, int record_stride,
                               bool record_states) {
    if (!(dt > 0) || !(T >= dt)) throw DomainError("solve_deterministic: need T >= dt > 0");
    const long n = steps_for(T, dt);
    if (static_cast<long>(u_steps.size()) < n)
        throw DomainError("solve_deterministic: control path shorter than the step grid");

    SimConfig rc;  // recording shell only
    rc.mode_cutoff = x0.modes();
    rc.dt = dt;
    rc.horizon = T;
    rc.record_stride = record_stride;
    rc.record_states = record_states;

    const StepFactors fac(x0.modes(), dt);
    spectral::Field x = x0, nbuf(x0.grid());

    RecordSpec none;
    Recorder rec(rc, none);
    rec.push(0.0, x);
    for (long i = 1; i <= n; ++i) {
        checked_step(i, [&] { spectral::nonlinearity_into(x, nbuf); });
        nbuf += u_steps[static_cast<std::size_t>(i - 1)];
        auto xa = x.amps();
        auto na = nbuf.amps();
        for (std::size_t k = 0; k < xa.size(); ++k)
            xa[k] = fac.decay[k] * xa[k] + fac.phi1dt[k] * na[k];
        if (!x.finite())
            throw NumericalError("solve_deterministic: non-finite state", i);
        if (rec.due(i, n)) rec.push(static_cast<double>(i) * dt, x);
    }
    return std::move(rec.traj);
}

std::vector<double> comparison_ode(double g0, double K, double T, double dt) {
    if (!(g0 >= 0)) throw DomainError("comparison_ode: g0 must be nonnegative");
    if (!(K > 0)) throw DomainError("comparison_ode: K must be positive");
    if (!(dt > 0) || !(T >= dt)) throw DomainError("comparison_ode: need T >= dt > 0");

    const long n = steps_for(T, dt);
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    g[0] = g0;
    if (std::abs(g0 - K) <= 1e-14 * K) {
        std::fill(g.begin(), g.end(), K);
        g[0] = g0;
        return g;
    }
    const double r = (g0 + K) / (g0 - K);
    for (long i = 1; i <= n; ++i) {
        double t = static_cast<double>(i) * dt;
        double e = 2.0 * K * t;
        if (e > 700.0) {
            g[static_cast<std::size_t>(i)] = K;
            continue;
        }
        g[static_cast<std::size_t>(i)] = K + 2.0 * K / (r * std::exp(e) - 1.0);
    }
    return g;
}

double calibrate_comparison_constant(const SimConfig& config, int paths,
                                     std::span<const double> x0_amplitudes) {
    config.validate();
    const auto grid = config.grid();
    const auto model = config.noise_model();
    const long n = config.step_count();
    const StepFactors fac(config.mode_cutoff, config.dt);
    const double P = static_cast<double>(grid.padded_size);

    double needed = 1.0;
    for (int path = 0; path < paths; ++path) {
        RngNoiseSource src(
            model, config.dt,
            make_rng(config.seed, static_cast<std::uint64_t>(path),
                     stream::subordinator),
            make_rng(config.seed, static_cast<std::uint64_t>(path),
                     stream::gaussian));

        double amp = x0_amplitudes.empty()
                         ? 0.0
                         : x0_amplitudes[static_cast<std::size_t>(path) %
                                         x0_amplitudes.size()];
        spectral::Field y = spectral::single_mode(grid, 1, amp / std::numbers::sqrt2);
        spectral::Field z(grid), nbuf(grid), wbuf(grid);
        std::vector<std::complex<double>> dw(
            static_cast<std::size_t>(config.mode_cutoff));
        std::vector<double> uy(static_cast<std::size_t>(grid.padded_size));

        for (long i = 1; i <= n; ++i) {
            // Pointwise energy pairing at the step's left endpoint.
            {
                auto s = spectral::thread_workspace(grid).synthesize(y);
                std::copy(s.begin(), s.end(), uy.begin());
            }
            auto uz = spectral::thread_workspace(grid).synthesize(z);
            double pair2 = 0, y4 = 0, z4 = 0;
            for (std::size_t j = 0; j < uy.size(); ++j) {
                double w = uy[j] + uz[j];
                pair2 += uy[j] * (w - w * w * w);
                double y2 = uy[j] * uy[j], z2 = uz[j] * uz[j];
                y4 += y2 * y2;
                z4 += z2 * z2;
            }
            pair2 = 2.0 * pair2 / P;
            y4 /= P;
            z4 /= P;
            needed = std::max(needed, (pair2 + y4) / (1.0 + z4));

            src.next_dS();
            src.next_dW(dw);
            wbuf = y;
            wbuf += z;
            spectral::nonlinearity_into(wbuf, nbuf);
            auto ya = y.amps();
            auto za = z.amps();
            auto na = nbuf.amps();
            for (std::size_t k = 0; k < ya.size(); ++k) {
                ya[k] = fac.decay[k] * ya[k] + fac.phi1dt[k] * na[k];
                za[k] = fac.decay[k] * za[k] + dw[k];
            }
            if (!y.finite() || !z.finite())
                throw NumericalError("calibration: non-finite state", i);
        }
    }
    return std::pow(2.0, std::ceil(std::log2(needed)));
}

}  // namespace spde::sim
