// spdelab: batch front-end for the stochastic reaction-diffusion laboratory.
//
// Usage:  spdelab <subcommand> [config] [--threads N] [--out DIR] [--seed U64]
//
// Subcommands: simulate, moments, occupation, recurrence, ldp, control,
// noise-check, selftest.  Every output file begins with a header block that
// echoes the effective configuration; re-running on the echoed config
// reproduces the file byte for byte at any thread count.
//
// Exit codes: 0 success, 2 config error, 3 numerical error, 4 invariant
// violation (selftest).

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "spde/csv.hpp"
#include "spde/studies.hpp"
#include "spde/version.hpp"

namespace {

using namespace spde;

std::string out_path(const io::RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out) / name).string();
}

std::string fd(double v) { return io::format_double(v); }

int run_simulate(const io::RunConfig& cfg) {
    auto study = studies::simulate_study(cfg);
    io::Csv csv;
    csv.header_block = io::config_echo_block(cfg, "simulate");
    csv.columns = {"t", "h_norm", "v_norm", "sobolev_delta"};
    for (const auto& obs : study.panel) csv.columns.push_back(obs.name);
    const auto& t = study.traj;
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::vector<std::string> row = {fd(t.times[i]), fd(t.h_norm[i]),
                                        fd(t.v_norm[i]), fd(t.delta_norm[i])};
        for (const auto& series : t.custom) row.push_back(fd(series[i]));
        csv.add_row(std::move(row));
    }
    csv.write(out_path(cfg, "simulate.csv"));
    std::cout << "simulate: " << t.size() << " records -> "
              << out_path(cfg, "simulate.csv") << "\n";
    return 0;
}

int run_moments(const io::RunConfig& cfg) {
    auto study = studies::moment_estimate(cfg);
    io::Csv csv;
    csv.header_block = io::config_echo_block(cfg, "moments");
    csv.columns = {"x0_label", "T", "p", "estimate", "se"};
    for (const auto& row : study.rows)
        csv.add_row({row.x0_label, fd(row.T), fd(row.p), fd(row.estimate),
                     fd(row.se)});
    csv.write(out_path(cfg, "moments.csv"));
    std::cout << "moments: ratio across initial conditions at T="
              << fd(study.first_horizon) << " is " << fd(study.ratio_across_x0)
              << "\n";
    for (const auto& g : study.growth)
        std::cout << "  growth x0=" << g.x0_label << ": ratio " << fd(g.ratio)
                  << " (limit " << fd(g.limit) << ") "
                  << (g.ok ? "ok" : "EXCEEDED") << "\n";
    return 0;
}

int run_occupation(const io::RunConfig& cfg) {
    auto study = studies::occupation_study(cfg);
    io::Csv csv;
    csv.header_block = io::config_echo_block(cfg, "occupation");
    csv.columns = {"observable", "ensemble", "mean", "se", "m"};
    for (std::size_t j = 0; j < study.rows.size(); ++j) {
        const auto& r = study.rows[j];
        csv.add_row({r.observable, "a", fd(r.a.mean), fd(r.a.se),
                     std::to_string(r.a.n)});
        csv.add_row({r.observable, "b", fd(r.b.mean), fd(r.b.se),
                     std::to_string(r.b.n)});
    }
    csv.write(out_path(cfg, "occupation.csv"));

    io::Csv twin;
    twin.header_block = io::config_echo_block(cfg, "occupation");
    twin.columns = {"observable", "diff", "limit", "pass"};
    for (const auto& r : study.rows)
        twin.add_row({r.observable, fd(r.diff), fd(r.limit), r.ok ? "1" : "0"});
    twin.write(out_path(cfg, "occupation_twin.csv"));

    std::cout << "occupation: twin ensembles "
              << (study.all_ok() ? "agree" : "DISAGREE") << " on "
              << study.rows.size() << " observables\n";
    return 0;
}

int run_recurrence(const io::RunConfig& cfg) {
    auto study = studies::recurrence_study(cfg);
    io::Csv csv;
    csv.header_block = io::config_echo_block(cfg, "recurrence");
    csv.columns = {"n", "p_tail", "ci_lo", "ci_hi"};
    if (!study.all_censored) {
        for (std::size_t i = 0; i < study.fit.n.size(); ++i)
            csv.add_row({std::to_string(study.fit.n[i]), fd(study.fit.p_tail[i]),
                         fd(study.fit.ci_lo[i]), fd(study.fit.ci_hi[i])});
    }
    csv.write(out_path(cfg, "recurrence.csv"));

    io::Csv summary;
    summary.header_block = io::config_echo_block(cfg, "recurrence");
    summary.columns = {"metric", "value", "flag"};
    summary.add_row({"m_level", fd(study.m_level), ""});
    summary.add_row({"censored", std::to_string(study.record.censored_count()),
                     study.all_censored ? "all_censored" : ""});
    if (!study.all_censored && study.fit.fitted) {
        summary.add_row({"slope", fd(study.fit.slope), ""});
        summary.add_row({"intercept", fd(study.fit.intercept), ""});
        summary.add_row({"r_squared", fd(study.fit.r_squared), ""});
        if (study.lambda_valid) {
            summary.add_row({"exp_moment_half_lambda", fd(study.at_half.lower_bound),
                             study.at_half.flag_name()});
            summary.add_row({"exp_moment_double_lambda",
                             fd(study.at_double.lower_bound),
                             study.at_double.flag_name()});
            summary.add_row({"exp_moment_double_lambda_doubled_level",
                             fd(study.at_double_raised.lower_bound),
                             study.at_double_raised.flag_name()});
        }
    }
    summary.write(out_path(cfg, "recurrence_expmoment.csv"));

    if (study.all_censored)
        std::cout << "recurrence: all trajectories censored at n_max="
                  << cfg.n_max << " (level " << fd(study.m_level)
                  << "); fit skipped\n";
    else
        std::cout << "recurrence: level " << fd(study.m_level) << ", slope "
                  << fd(study.fit.slope) << ", R^2 " << fd(study.fit.r_squared)
                  << "\n";
    return 0;
}

int run_ldp(const io::RunConfig& cfg) {
    auto study = studies::ldp_study(cfg);
    io::Csv scgf;
    scgf.header_block = io::config_echo_block(cfg, "ldp");
    scgf.columns = {"lambda", "scgf"};
    for (std::size_t i = 0; i < study.curve.lambda.size(); ++i)
        scgf.add_row({fd(study.curve.lambda[i]), fd(study.curve.value[i])});
    scgf.write(out_path(cfg, "ldp_scgf.csv"));

    io::Csv rate;
    rate.header_block = io::config_echo_block(cfg, "ldp");
    rate.columns = {"r", "rate"};
    for (std::size_t i = 0; i < study.rate.r.size(); ++i)
        rate.add_row({fd(study.rate.r[i]), fd(study.rate.value[i])});
    rate.write(out_path(cfg, "ldp_rate.csv"));

    std::cout << "ldp: rate minimizer " << fd(study.minimizer) << " vs mean "
              << fd(study.occupation_mean.mean) << ", min value "
              << fd(study.min_value) << "\n";
    return 0;
}

int run_control(const io::RunConfig& cfg) {
    auto study = studies::control_study(cfg);
    io::Csv csv;
    csv.header_block = io::config_echo_block(cfg, "control");
    csv.columns = {"metric", "value"};
    csv.add_row({"residual_v", fd(study.coarse.residual_v)});
    csv.add_row({"residual_h", fd(study.coarse.residual_h)});
    csv.add_row({"sup_u_vnorm", fd(study.coarse.sup_u_vnorm)});
    csv.add_row({"epsilon", fd(study.coarse.epsilon)});
    csv.add_row({"pass", study.coarse.pass ? "1" : "0"});
    csv.add_row({"residual_v_half_dt", fd(study.fine.residual_v)});
    csv.add_row({"shrink_factor", fd(study.shrink)});
    csv.write(out_path(cfg, "control.csv"));
    std::cout << "control: residual_v " << fd(study.coarse.residual_v) << " ("
              << (study.coarse.pass ? "pass" : "FAIL") << "), shrink x"
              << fd(study.shrink) << " at dt/2\n";
    return 0;
}

void write_checks(const io::RunConfig& cfg, const std::string& sub,
                  const std::string& file,
                  const std::vector<studies::CheckRow>& rows) {
    io::Csv csv;
    csv.header_block = io::config_echo_block(cfg, sub);
    csv.columns = {"name", "value", "target", "tolerance", "pass"};
    for (const auto& r : rows)
        csv.add_row({r.name, fd(r.value), fd(r.target), fd(r.tolerance),
                     r.pass ? "1" : "0"});
    csv.write(out_path(cfg, file));
}

int run_noise_check(const io::RunConfig& cfg) {
    auto check = studies::noise_check(cfg);
    write_checks(cfg, "noise-check", "noise_check.csv", check.rows);
    for (const auto& r : check.rows)
        std::cout << (r.pass ? "  ok   " : "  FAIL ") << r.name << " = "
                  << fd(r.value) << " (target " << fd(r.target) << ")\n";
    return check.all_ok() ? 0 : 4;
}

int run_selftest(const io::RunConfig& cfg) {
    auto st = studies::selftest(cfg);
    write_checks(cfg, "selftest", "selftest.csv", st.rows);
    for (const auto& r : st.rows)
        std::cout << (r.pass ? "  ok   " : "  FAIL ") << r.name << " = "
                  << fd(r.value) << (r.detail.empty() ? "" : " [" + r.detail + "]")
                  << "\n";
    std::cout << (st.all_ok() ? "selftest: all invariants hold\n"
                              : "selftest: INVARIANT VIOLATION\n");
    return st.all_ok() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic reaction-diffusion laboratory"};
    app.set_version_flag("--version", std::string("spdelab ") + spde::kVersion);

    std::string subcommand, config_path;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;

    app.add_option("subcommand", subcommand,
                   "simulate | moments | occupation | recurrence | ldp | control "
                   "| noise-check | selftest")
        ->required();
    app.add_option("config", config_path, "flat key = value config file");
    app.add_option("--threads", threads, "worker threads (overrides config)");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed, "master seed (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        io::RunConfig cfg = config_path.empty()
                                ? io::RunConfig{}
                                : io::RunConfig::from_file(config_path);
        if (threads) cfg.threads = *threads;
        if (out_dir) cfg.out = *out_dir;
        if (seed) cfg.seed = *seed;

        if (subcommand == "simulate") return run_simulate(cfg);
        if (subcommand == "moments") return run_moments(cfg);
        if (subcommand == "occupation") return run_occupation(cfg);
        if (subcommand == "recurrence") return run_recurrence(cfg);
        if (subcommand == "ldp") return run_ldp(cfg);
        if (subcommand == "control") return run_control(cfg);
        if (subcommand == "noise-check") return run_noise_check(cfg);
        if (subcommand == "selftest") return run_selftest(cfg);
        std::cerr << "unknown subcommand '" << subcommand << "'\n";
        return 2;
    } catch (const spde::UsageError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const spde::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const spde::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const spde::EstimationError& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 3;
    } catch (const spde::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
