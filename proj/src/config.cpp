#include "spde/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace spde::io {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw UsageError("config: bad numeric value for '" + key + "': " + v);
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(d);
    } catch (const std::exception&) {
        throw UsageError("config: bad integer value for '" + key + "': " + v);
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        unsigned long long d = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw UsageError("config: bad seed value for '" + key + "': " + v);
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_double("list", item));
    }
    if (out.empty()) throw UsageError("config: empty list value");
    return out;
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config: line " + std::to_string(lineno) +
                             " is not 'key = value'");
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "alpha") alpha = to_double(key, value);
    else if (key == "theta") theta = to_double(key, value);
    else if (key == "delta_bound") delta_bound = to_double(key, value);
    else if (key == "mode_cutoff") mode_cutoff = to_int(key, value);
    else if (key == "dt") dt = to_double(key, value);
    else if (key == "horizon") horizon = to_double(key, value);
    else if (key == "seed") seed = to_u64(key, value);
    else if (key == "record_stride") record_stride = to_int(key, value);
    else if (key == "scheme") scheme = value;
    else if (key == "trunc_rho") trunc_rho = to_double(key, value);
    else if (key == "x0_amp") x0_amp = to_double(key, value);
    else if (key == "x0_mode") x0_mode = to_int(key, value);
    else if (key == "ensemble") ensemble = to_int(key, value);
    else if (key == "threads") threads = to_int(key, value);
    else if (key == "out") out = value;
    else if (key == "obs_clip") obs_clip = to_double(key, value);
    else if (key == "obs_mode") obs_mode = to_int(key, value);
    else if (key == "obs_delta") obs_delta = to_double(key, value);
    else if (key == "p") p = to_double(key, value);
    else if (key == "moment_horizons") moment_horizons = value;
    else if (key == "x0_amps") x0_amps = value;
    else if (key == "allow_unvalidated_p") allow_unvalidated_p = to_int(key, value);
    else if (key == "delta") delta = to_double(key, value);
    else if (key == "m_level") m_level = to_double(key, value);
    else if (key == "n_max") n_max = to_int(key, value);
    else if (key == "percentile") percentile = to_double(key, value);
    else if (key == "stationary_paths") stationary_paths = to_int(key, value);
    else if (key == "stationary_horizon") stationary_horizon = to_double(key, value);
    else if (key == "lambda_points") lambda_points = to_int(key, value);
    else if (key == "lambda_half_width") lambda_half_width = to_double(key, value);
    else if (key == "twin_x0_scale") twin_x0_scale = to_double(key, value);
    else if (key == "top_fraction") top_fraction = to_double(key, value);
    else if (key == "z_paths") z_paths = to_int(key, value);
    else if (key == "t1") t1 = to_double(key, value);
    else if (key == "epsilon") epsilon = to_double(key, value);
    else if (key == "target_amp") target_amp = to_double(key, value);
    else if (key == "start_amp") start_amp = to_double(key, value);
    else if (key == "selftest_samples") selftest_samples = to_int(key, value);
    else throw UsageError("config: unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    return {
        {"alpha", fmt(alpha)},
        {"theta", fmt(theta)},
        {"delta_bound", fmt(delta_bound)},
        {"mode_cutoff", fmt(mode_cutoff)},
        {"dt", fmt(dt)},
        {"horizon", fmt(horizon)},
        {"seed", fmt(seed)},
        {"record_stride", fmt(record_stride)},
        {"scheme", scheme},
        {"trunc_rho", fmt(trunc_rho)},
        {"x0_amp", fmt(x0_amp)},
        {"x0_mode", fmt(x0_mode)},
        {"ensemble", fmt(ensemble)},
        {"threads", fmt(threads)},
        {"out", out},
        {"obs_clip", fmt(obs_clip)},
        {"obs_mode", fmt(obs_mode)},
        {"obs_delta", fmt(obs_delta)},
        {"p", fmt(p)},
        {"moment_horizons", moment_horizons},
        {"x0_amps", x0_amps},
        {"allow_unvalidated_p", fmt(allow_unvalidated_p)},
        {"delta", fmt(delta)},
        {"m_level", fmt(m_level)},
        {"n_max", fmt(n_max)},
        {"percentile", fmt(percentile)},
        {"stationary_paths", fmt(stationary_paths)},
        {"stationary_horizon", fmt(stationary_horizon)},
        {"lambda_points", fmt(lambda_points)},
        {"lambda_half_width", fmt(lambda_half_width)},
        {"twin_x0_scale", fmt(twin_x0_scale)},
        {"top_fraction", fmt(top_fraction)},
        {"z_paths", fmt(z_paths)},
        {"t1", fmt(t1)},
        {"epsilon", fmt(epsilon)},
        {"target_amp", fmt(target_amp)},
        {"start_amp", fmt(start_amp)},
        {"selftest_samples", fmt(selftest_samples)},
    };
}

sim::Scheme RunConfig::parsed_scheme() const {
    if (scheme == "full") return sim::Scheme::full;
    if (scheme == "y_split") return sim::Scheme::y_split;
    if (scheme == "truncated") return sim::Scheme::truncated;
    throw UsageError("config: unknown scheme '" + scheme + "'");
}

sim::SimConfig RunConfig::sim() const {
    sim::SimConfig c;
    c.alpha = alpha;
    c.theta = theta;
    c.delta_bound = delta_bound;
    c.mode_cutoff = mode_cutoff;
    c.dt = dt;
    c.horizon = horizon;
    c.seed = seed;
    c.record_stride = record_stride;
    c.scheme = parsed_scheme();
    c.trunc_rho = trunc_rho;
    c.observable_delta = obs_delta;
    c.validate();
    return c;
}

}  // namespace spde::io
