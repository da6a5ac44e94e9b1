#include "spde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spde::stats {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double Observable::operator()(const spectral::Field& x) const {
    switch (kind) {
        case Kind::h_norm: return spectral::h_norm(x);
        case Kind::v_norm: return spectral::v_norm(x);
        case Kind::sobolev: return spectral::sobolev_norm(x, delta);
        case Kind::mode_amplitude: return std::abs(x.amp(mode));
        case Kind::clipped_h: return std::min(clip, spectral::h_norm(x));
        case Kind::clipped_v: return std::min(clip, spectral::v_norm(x));
    }
    throw Error("Observable: unknown kind");
}

bool Observable::bounded() const {
    return kind == Kind::clipped_h || kind == Kind::clipped_v;
}

double Observable::upper_bound() const { return bounded() ? clip : kInf; }

Observable Observable::h_norm_obs() { return {Kind::h_norm, "h_norm", 0, 0, 0}; }
Observable Observable::v_norm_obs() { return {Kind::v_norm, "v_norm", 0, 0, 0}; }
Observable Observable::sobolev_obs(double delta) {
    return {Kind::sobolev, "sobolev_" + std::to_string(delta), delta, 0, 0};
}
Observable Observable::mode_amplitude_obs(int k) {
    return {Kind::mode_amplitude, "mode" + std::to_string(k) + "_abs", 0, k, 0};
}
Observable Observable::clipped_h_obs(double clip) {
    return {Kind::clipped_h, "clip_h", 0, 0, clip};
}
Observable Observable::clipped_v_obs(double clip) {
    return {Kind::clipped_v, "clip_v", 0, 0, clip};
}

SummaryStat summarize(std::span<const double> samples) {
    SummaryStat s;
    s.n = samples.size();
    if (s.n == 0) return s;
    double sum = std::accumulate(samples.begin(), samples.end(), 0.0);
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0;
        for (double v : samples) ss += (v - s.mean) * (v - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(s.n - 1) /
                         static_cast<double>(s.n));
    }
    return s;
}

double occupation_average(std::span<const double> times,
                          std::span<const double> values) {
    if (times.size() != values.size() || times.size() < 2)
        throw UsageError("occupation_average: need at least two recorded instants");
    const double span = times.back() - times.front();
    if (!(span > 0)) throw UsageError("occupation_average: empty time span");
    double max_gap = 0, acc = 0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        double gap = times[i + 1] - times[i];
        if (!(gap > 0)) throw UsageError("occupation_average: times not increasing");
        max_gap = std::max(max_gap, gap);
        acc += 0.5 * (values[i] + values[i + 1]) * gap;
    }
    if (max_gap > 0.01 * span * (1.0 + 1e-9))
        throw UsageError("occupation_average: recording too sparse for the span");
    return acc / span;
}

double occupation_average(const sim::Trajectory& traj, const Observable& f) {
    if (!traj.states.empty()) {
        std::vector<double> vals;
        vals.reserve(traj.states.size());
        for (const auto& x : traj.states) vals.push_back(f(x));
        return occupation_average(traj.times, vals);
    }
    for (std::size_t j = 0; j < traj.custom_names.size(); ++j)
        if (traj.custom_names[j] == f.name)
            return occupation_average(traj.times, traj.custom[j]);
    throw UsageError("occupation_average: observable '" + f.name +
                     "' not recorded and no states stored");
}

std::size_t HittingRecord::finite_count() const {
    std::size_t c = 0;
    for (auto b : censored) c += (b == 0);
    return c;
}

std::size_t HittingRecord::censored_count() const {
    return censored.size() - finite_count();
}

HittingRecord hitting_times(const std::vector<std::vector<double>>& integer_norms,
                            double m_level, double delta, int n_max) {
    if (n_max < 1) throw DomainError("hitting_times: n_max must be >= 1");
    HittingRecord rec;
    rec.m_level = m_level;
    rec.delta = delta;
    rec.n_max = n_max;
    rec.taus.reserve(integer_norms.size());
    rec.censored.reserve(integer_norms.size());
    for (const auto& norms : integer_norms) {
        int tau = 0;
        int upto = std::min<int>(n_max, static_cast<int>(norms.size()));
        for (int k = 1; k <= upto; ++k) {
            if (norms[static_cast<std::size_t>(k - 1)] <= m_level) {
                tau = k;
                break;
            }
        }
        if (tau == 0) {
            if (static_cast<int>(norms.size()) < n_max)
                throw UsageError(
                    "hitting_times: record stops before n_max without a hit");
            rec.taus.push_back(n_max);
            rec.censored.push_back(1);
        } else {
            rec.taus.push_back(tau);
            rec.censored.push_back(0);
        }
    }
    return rec;
}

namespace {

// Wilson score interval at 95%.
void wilson(double phat, double n, double& lo, double& hi) {
    const double z = 1.959963984540054;
    const double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    lo = std::max(0.0, center - half);
    hi = std::min(1.0, center + half);
}

}  // namespace

double TailFit::geometric_rate() const { return std::exp(slope); }

TailFit recurrence_tail(const HittingRecord& record) {
    const std::size_t m = record.size();
    if (m == 0) throw EstimationError("recurrence_tail: empty record");
    if (record.censored_count() == m)
        throw EstimationError("recurrence_tail: every trajectory censored");

    TailFit fit;
    const double M = static_cast<double>(m);
    for (int n = 1; n <= record.n_max; ++n) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (record.censored[i] || record.taus[i] > n) ++count;
        double p = static_cast<double>(count) / M;
        double lo, hi;
        wilson(p, M, lo, hi);
        fit.n.push_back(n);
        fit.p_tail.push_back(p);
        fit.ci_lo.push_back(lo);
        fit.ci_hi.push_back(hi);
    }

    // Least squares of log p against n over the strictly positive tail.
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < fit.n.size(); ++i)
        if (fit.p_tail[i] > 0) {
            xs.push_back(static_cast<double>(fit.n[i]));
            ys.push_back(std::log(fit.p_tail[i]));
        }
    if (xs.size() >= 2) {
        double n = static_cast<double>(xs.size());
        double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
        double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        double det = n * sxx - sx * sx;
        if (det > 0) {
            fit.slope = (n * sxy - sx * sy) / det;
            fit.intercept = (sy - fit.slope * sx) / n;
            double ss_tot = 0, ss_res = 0, ymean = sy / n;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                double pred = fit.intercept + fit.slope * xs[i];
                ss_res += (ys[i] - pred) * (ys[i] - pred);
                ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
            }
            fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot
                                       : (ss_res == 0 ? 1.0 : 0.0);
            fit.fitted = true;
        }
    }
    return fit;
}

const char* ExpMomentTau::flag_name() const {
    switch (flag) {
        case Flag::finite: return "finite";
        case Flag::divergent: return "divergent";
        case Flag::not_conclusive: return "not_conclusive";
    }
    return "?";
}

ExpMomentTau exp_moment_tau(const HittingRecord& record, double lambda) {
    if (!(lambda > 0)) throw DomainError("exp_moment_tau: lambda must be positive");
    const std::size_t m = record.size();
    if (m == 0) throw EstimationError("exp_moment_tau: empty record");

    ExpMomentTau out;
    const double M = static_cast<double>(m);
    double finite_part = 0, censored_part = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (record.censored[i])
            censored_part += std::exp(lambda * record.n_max) / M;
        else
            finite_part += std::exp(lambda * record.taus[i]) / M;
    }
    out.lower_bound = finite_part + censored_part;

    if (record.censored_count() == m) {
        out.flag = ExpMomentTau::Flag::not_conclusive;
        return out;
    }

    TailFit fit = recurrence_tail(record);
    if (fit.fitted) {
        out.geometric_rate = fit.geometric_rate();
        bool geometric_ok = std::exp(lambda) * out.geometric_rate < 1.0;
        if (censored_part > finite_part)
            out.flag = ExpMomentTau::Flag::not_conclusive;
        else
            out.flag = geometric_ok ? ExpMomentTau::Flag::finite
                                    : ExpMomentTau::Flag::divergent;
    } else {
        // Degenerate tail (all mass at tau = 1 or a single positive point):
        // any fixed exponential moment of a bounded tau is finite.
        out.flag = censored_part > finite_part
                       ? ExpMomentTau::Flag::not_conclusive
                       : ExpMomentTau::Flag::finite;
    }
    return out;
}

ScgfCurve scgf(std::span<const double> samples, std::span<const double> lambda_grid,
               double T) {
    if (samples.empty()) throw UsageError("scgf: empty sample");
    if (!(T > 0)) throw DomainError("scgf: T must be positive");
    ScgfCurve curve;
    curve.T = T;
    const double M = static_cast<double>(samples.size());
    for (double lam : lambda_grid) {
        double mstar = -kInf;
        for (double L : samples) mstar = std::max(mstar, lam * T * L);
        double sum = 0, wmax = 0;
        for (double L : samples) {
            double w = std::exp(lam * T * L - mstar);
            sum += w;
            wmax = std::max(wmax, w);
        }
        curve.lambda.push_back(lam);
        curve.value.push_back((mstar + std::log(sum / M)) / T);
        curve.ess_warning.push_back(wmax / sum > 0.5 ? 1 : 0);
    }
    return curve;
}

RateCurve legendre(const ScgfCurve& curve, double convexity_tol) {
    const std::size_t m = curve.lambda.size();
    if (m < 3) throw UsageError("legendre: need at least three grid points");

    // Convexity check: second differences of the curve must stay above
    // -convexity_tol (divided differences handle non-uniform grids).
    for (std::size_t i = 1; i + 1 < m; ++i) {
        double sl = (curve.value[i] - curve.value[i - 1]) /
                    (curve.lambda[i] - curve.lambda[i - 1]);
        double sr = (curve.value[i + 1] - curve.value[i]) /
                    (curve.lambda[i + 1] - curve.lambda[i]);
        double d2 = (sr - sl) * 0.5 * (curve.lambda[i + 1] - curve.lambda[i - 1]);
        if (d2 < -convexity_tol)
            throw EstimationError("legendre: input not convex beyond tolerance");
    }

    RateCurve rate;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        double r = (curve.value[i + 1] - curve.value[i - 1]) /
                   (curve.lambda[i + 1] - curve.lambda[i - 1]);
        double best = -kInf;
        std::size_t arg = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double v = curve.lambda[j] * r - curve.value[j];
            if (v > best) {
                best = v;
                arg = j;
            }
        }
        bool interior = arg > 0 && arg + 1 < m;
        if (!interior) {
            // A boundary supremum may be a tie with an interior point.
            for (std::size_t j = 1; j + 1 < m && !interior; ++j)
                if (curve.lambda[j] * r - curve.value[j] >=
                    best - 1e-15 * (1.0 + std::abs(best)))
                    interior = true;
        }
        rate.r.push_back(r);
        rate.value.push_back(best);
        rate.interior.push_back(interior ? 1 : 0);
    }
    return rate;
}

double rate_minimizer(const RateCurve& curve) {
    if (curve.r.empty()) throw EstimationError("rate_minimizer: empty curve");
    std::size_t arg = 0;
    for (std::size_t i = 1; i < curve.r.size(); ++i)
        if (curve.value[i] < curve.value[arg]) arg = i;
    if (arg == 0 || arg + 1 == curve.r.size()) return curve.r[arg];
    // Parabolic refinement through the three bracketing points.
    double x0 = curve.r[arg - 1], x1 = curve.r[arg], x2 = curve.r[arg + 1];
    double y0 = curve.value[arg - 1], y1 = curve.value[arg], y2 = curve.value[arg + 1];
    double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
    double second = (d2 - d1) / (x2 - x0);
    if (!(second > 0)) return x1;
    double slope_mid = (y2 - y0) / (x2 - x0);
    double vertex = 0.5 * (x0 + x2) - slope_mid / (2.0 * second);
    if (vertex < x0 || vertex > x2) return x1;
    return vertex;
}

HillEstimate tail_index(std::span<const double> samples, double top_fraction,
                        std::uint64_t bootstrap_seed, int bootstrap_rounds) {
    if (samples.size() < 500)
        throw UsageError("tail_index: need at least 500 samples");
    if (!(top_fraction > 0 && top_fraction <= 0.2))
        throw UsageError("tail_index: top fraction must lie in (0, 0.2]");

    auto hill = [&](std::vector<double>& v) -> double {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        const auto k = std::max<std::size_t>(
            2, static_cast<std::size_t>(static_cast<double>(n) * top_fraction));
        double threshold = v[n - k - 1];
        if (!(threshold > 0))
            throw EstimationError("tail_index: nonpositive threshold order statistic");
        double acc = 0;
        for (std::size_t i = n - k; i < n; ++i) acc += std::log(v[i] / threshold);
        double xi = acc / static_cast<double>(k);
        if (!(xi > 0)) throw EstimationError("tail_index: degenerate sample");
        return 1.0 / xi;
    };

    HillEstimate est;
    std::vector<double> work(samples.begin(), samples.end());
    const auto n = work.size();
    est.k_used = static_cast<int>(std::max<std::size_t>(
        2, static_cast<std::size_t>(static_cast<double>(n) * top_fraction)));
    est.index = hill(work);
    est.light_tail = est.index > 4.0;

    if (bootstrap_rounds > 0) {
        Rng rng = make_rng(bootstrap_seed, 0, stream::bootstrap);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<double> stats;
        stats.reserve(static_cast<std::size_t>(bootstrap_rounds));
        std::vector<double> resample(n);
        for (int b = 0; b < bootstrap_rounds; ++b) {
            for (std::size_t i = 0; i < n; ++i)
                resample[i] = samples[pick(rng)];
            try {
                stats.push_back(hill(resample));
            } catch (const EstimationError&) {
                // Degenerate resample; skip.
            }
        }
        if (stats.size() >= 10) {
            est.ci_lo = quantile(stats, 0.025);
            est.ci_hi = quantile(stats, 0.975);
        } else {
            est.ci_lo = est.ci_hi = est.index;
        }
    } else {
        est.ci_lo = est.ci_hi = est.index;
    }
    return est;
}

double PrefixMoments::last_relative_change() const {
    if (estimates.size() < 2) return 0;
    double a = estimates[estimates.size() - 2];
    double b = estimates.back();
    if (a == 0 && b == 0) return 0;
    return std::abs(b - a) / std::max(std::abs(a), 1e-300);
}

PrefixMoments prefix_moment_estimates(std::span<const double> samples, double p,
                                      int doublings) {
    if (samples.empty()) throw UsageError("prefix_moment_estimates: empty sample");
    if (doublings < 1) throw DomainError("prefix_moment_estimates: doublings >= 1");
    PrefixMoments out;
    for (int j = doublings; j >= 0; --j) {
        std::size_t size = samples.size() >> j;
        if (size == 0) continue;
        double acc = 0;
        for (std::size_t i = 0; i < size; ++i) acc += std::pow(samples[i], p);
        out.sizes.push_back(size);
        out.estimates.push_back(acc / static_cast<double>(size));
    }
    return out;
}

double quantile(std::vector<double> samples, double q) {
    if (samples.empty()) throw UsageError("quantile: empty sample");
    if (!(q >= 0 && q <= 1)) throw DomainError("quantile: q outside [0, 1]");
    std::sort(samples.begin(), samples.end());
    double h = (static_cast<double>(samples.size()) - 1.0) * q;
    auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= samples.size()) return samples.back();
    return samples[lo] + (h - static_cast<double>(lo)) * (samples[lo + 1] - samples[lo]);
}

}  // namespace spde::stats
