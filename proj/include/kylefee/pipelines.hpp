#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kylefee/config.hpp"
#include "kylefee/csv.hpp"
#include "kylefee/metrics.hpp"
#include "kylefee/model.hpp"
#include "kylefee/moments.hpp"
#include "kylefee/montecarlo.hpp"
#include "kylefee/profits.hpp"
#include "kylefee/quadrature.hpp"
#include "kylefee/solver.hpp"

namespace kylefee {

// One batch run: config + output directory + overrides from the command line.
struct RunManifest {
    Config config;
    std::string out_dir = "out";
    std::vector<double> kappas = {0.0, 0.025, 0.035, 0.045, 0.07, 0.09};
    std::uint64_t seed = 20260809ull;
    int iter_limit = 0;  // 0 = iterate to tolerance
    int n_paths = 50000;
    int n_steps = 3960;
    bool dump_wealth = false;
};

namespace detail {

inline SolveOptions solve_options(const RunManifest& man) {
    SolveOptions o;
    o.iter_limit = man.iter_limit;
    if (man.iter_limit > 0) o.damping = 1.0;
    return o;
}

inline std::string kappa_tag(double kappa) { return fmt12(kappa); }

inline std::filesystem::path out_path(const RunManifest& man, const std::string& name) {
    std::filesystem::create_directories(man.out_dir);
    return std::filesystem::path(man.out_dir) / name;
}

// Equilibrium intensity where one exists, Kyle benchmark otherwise. Large
// fee slopes admit no interior solution; the fallback keeps the figure
// curves defined and is flagged in the beta_source column.
inline std::pair<IntensityProfile, std::string> intensity_or_benchmark(
    const MarketParams& params, const TimeGrid& grid, const SolveOptions& opts) {
    try {
        return {solve_equilibrium(params, grid, opts), "equilibrium"};
    } catch (const solver_error&) {
        IntensityProfile b = kyle_beta0(params, grid);
        b.kappa = params.kappa;
        return {b, "benchmark"};
    }
}

}  // namespace detail

// beta_<kappa>.csv per fee slope plus solver_diag.csv with the residual
// trace of every run.
inline void cmd_solve(const RunManifest& man) {
    const MarketParams& base = man.config.params;
    const TimeGrid grid = make_uniform_grid(base, man.config.n_grid, man.config.epsilon_fraction);
    const IntensityProfile bench = kyle_beta0(base, grid);

    CsvWriter diag(detail::out_path(man, "solver_diag.csv").string());
    diag.header({"kappa", "iteration", "residual"});

    for (double kap : man.kappas) {
        const MarketParams p = base.with_kappa(kap);
        const IntensityProfile prof = solve_equilibrium(p, grid, detail::solve_options(man));
        CsvWriter f(detail::out_path(man, "beta_" + detail::kappa_tag(kap) + ".csv").string());
        f.header({"t", "beta", "beta0"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            f.row({grid.nodes[i], prof.beta[i], bench.beta[i]});
        for (std::size_t it = 0; it < prof.residual_history.size(); ++it)
            diag.row({kap, static_cast<double>(it), prof.residual_history[it]});
    }
}

// table1.csv: correlations, variances and informativeness at ten equally
// spaced probe times for kappa = 0.035; the final column holds the analytic
// terminal limits. table2.csv: the regulator map and the associated profits.
inline void cmd_tables(const RunManifest& man) {
    const MarketParams& base = man.config.params;
    const TimeGrid grid = make_uniform_grid(base, man.config.n_grid, man.config.epsilon_fraction);
    const double T = base.horizon;
    const SolveOptions sopts = detail::solve_options(man);

    {
        const MarketParams p = base.with_kappa(0.035);
        const IntensityProfile prof = solve_equilibrium(p, grid, sopts);
        const MetricCurves mc = informativeness(prof, p, grid);
        std::vector<std::string> head = {"quantity"};
        std::vector<double> probes;
        for (int j = 1; j <= 9; ++j) probes.push_back(T * j / 10.0);
        for (int j = 1; j <= 10; ++j) head.push_back("t=" + fmt12(T * j / 10.0));

        auto at = [&](const std::vector<double>& curve, double limit) {
            std::vector<double> row;
            for (double t : probes) row.push_back(interp_linear(grid.nodes, curve, t));
            row.push_back(limit);
            return row;
        };
        const double s2v = base.sigma_v * base.sigma_v;
        CsvWriter f(detail::out_path(man, "table1.csv").string());
        f.comment("kappa = 0.035; final column is the analytic t -> T limit");
        f.header(head);
        f.row_labeled("rho_my", at(mc.rho_my, 1.0));
        f.row_labeled("rho_vp", at(mc.rho_vp, 1.0));
        f.row_labeled("var_p", at(mc.var_p, s2v));
        f.row_labeled("var_m", at(mc.var_m, s2v));
        f.row_labeled("iota", at(mc.iota, 1.0));
    }

    {
        const std::vector<double> rv_targets = {1.03, 1.05, 1.08, 1.15, 1.21};
        std::vector<double> kstar, pm9, pi9, iota9;
        RegulatorOptions ropts;
        ropts.solve = sopts;
        const double t9 = 0.9 * T;
        for (double rv : rv_targets) {
            const double ks = regulator_inverse_map(rv, base, grid, ropts);
            const MarketParams p = base.with_kappa(ks);
            const IntensityProfile prof = solve_equilibrium(p, grid, sopts);
            const ProfitCurves pc = profit_curves(prof, p, grid);
            const MetricCurves mc = informativeness(prof, p, grid);
            kstar.push_back(ks);
            pm9.push_back(interp_linear(grid.nodes, pc.market_maker, t9));
            pi9.push_back(interp_linear(grid.nodes, pc.insider, t9));
            iota9.push_back(interp_linear(grid.nodes, mc.iota, t9));
        }
        std::vector<std::string> head = {"quantity"};
        for (double rv : rv_targets) head.push_back("rv=" + fmt12(rv));
        CsvWriter f(detail::out_path(man, "table2.csv").string());
        f.comment("profits and informativeness at t = 0.9 T for the kappa solving sup_t rv = rv*");
        f.header(head);
        f.row_labeled("kappa_star", kstar);
        f.row_labeled("p_M", pm9);
        f.row_labeled("p_I", pi9);
        f.row_labeled("iota", iota9);
    }
}

inline void cmd_figures(const RunManifest& man) {
    const MarketParams& base = man.config.params;
    const TimeGrid grid = make_uniform_grid(base, man.config.n_grid, man.config.epsilon_fraction);
    const double T = base.horizon;
    const SolveOptions sopts = detail::solve_options(man);
    const IntensityProfile bench = kyle_beta0(base, grid);

    {  // fig1: covariance surface C(s,t) at kappa = 0.045
        const MarketParams p = base.with_kappa(0.045);
        const auto [prof, src] = detail::intensity_or_benchmark(p, grid, sopts);
        const MomentSet mom = order_flow_moments(prof.beta, p, grid);
        const std::size_t stride = std::max<std::size_t>(1, grid.size() / 100);
        CsvWriter f(detail::out_path(man, "fig1_covariance.csv").string());
        f.comment("C(s,t) of the order flow, kappa = 0.045, beta = " + src);
        std::vector<std::string> head = {"s\\t"};
        for (std::size_t j = 0; j < grid.size(); j += stride) head.push_back(fmt12(grid.nodes[j]));
        f.header(head);
        for (std::size_t i = 0; i < grid.size(); i += stride) {
            std::vector<double> row;
            for (std::size_t j = 0; j < grid.size(); j += stride)
                row.push_back(order_flow_covariance(mom, grid, grid.nodes[i], grid.nodes[j]));
            f.row_labeled(fmt12(grid.nodes[i]), row);
        }
    }

    {  // fig2: market-maker profit vs kappa, terminal and at t = 0.2 T
        CsvWriter f(detail::out_path(man, "fig2_mm_profit_vs_kappa.csv").string());
        f.comment("net market-maker profit as a function of kappa");
        f.header({"kappa", "p_M_terminal", "p_M_t2", "beta_source"});
        for (double kap = 0.0; kap <= 0.30001; kap += 0.0125) {
            const MarketParams p = base.with_kappa(kap);
            const auto [prof, src] = detail::intensity_or_benchmark(p, grid, sopts);
            const std::vector<double> pm = market_maker_profit_curve(prof.beta, p, grid);
            f.row_strings({fmt12(kap),
                           fmt12(market_maker_profit_terminal(prof.beta, p, grid)),
                           fmt12(interp_linear(grid.nodes, pm, 0.2 * T)), src});
        }
    }

    {  // fig5: V(t) under a heavy fee slope
        const MarketParams p = base.with_kappa(0.24);
        const auto [prof, src] = detail::intensity_or_benchmark(p, grid, sopts);
        const std::vector<double> V = order_flow_variance(prof.beta, p, grid);
        CsvWriter f(detail::out_path(man, "fig5_variance_t.csv").string());
        f.comment("V(t), kappa = 0.24, beta = " + src);
        f.header({"t", "V"});
        for (std::size_t i = 0; i < grid.size(); ++i) f.row({grid.nodes[i], V[i]});
    }

    {  // fig6: V(t, kappa) against kappa at three times
        CsvWriter f(detail::out_path(man, "fig6_variance_kappa.csv").string());
        f.comment("V at t = 0.1T, 0.5T, 0.9T against kappa");
        f.header({"kappa", "V_t1", "V_t5", "V_t9", "beta_source"});
        for (double kap = 0.0; kap <= 0.50001; kap += 0.02) {
            const MarketParams p = base.with_kappa(kap);
            const auto [prof, src] = detail::intensity_or_benchmark(p, grid, sopts);
            const std::vector<double> V = order_flow_variance(prof.beta, p, grid);
            f.row_strings({fmt12(kap), fmt12(interp_linear(grid.nodes, V, 0.1 * T)),
                           fmt12(interp_linear(grid.nodes, V, 0.5 * T)),
                           fmt12(interp_linear(grid.nodes, V, 0.9 * T)), src});
        }
    }

    // fig7 / fig8: the two net profit curves over time
    for (auto [kap, name] : {std::pair{0.045, "fig7_profits_t.csv"},
                             std::pair{0.07, "fig8_profits_t.csv"}}) {
        const MarketParams p = base.with_kappa(kap);
        const IntensityProfile prof = solve_equilibrium(p, grid, sopts);
        const ProfitCurves pc = profit_curves(prof, p, grid);
        CsvWriter f(detail::out_path(man, name).string());
        f.comment("net profits over time, kappa = " + fmt12(kap));
        f.header({"t", "p_I", "p_M", "p_N"});
        for (std::size_t i = 0; i < grid.size(); ++i)
            f.row({grid.nodes[i], pc.insider[i], pc.market_maker[i], pc.noise[i]});
    }

    {  // fig9: sup-profile of rv against kappa at three times
        const std::vector<double> ts = {0.001 * T, 0.36 * T, 0.9 * T};
        CsvWriter f(detail::out_path(man, "fig9_rv_kappa.csv").string());
        f.comment("rv(t, kappa) against kappa at t = 0.001T, 0.36T, 0.9T (benchmark intensity)");
        f.header({"kappa", "rv_t_early", "rv_t_mid", "rv_t_late"});
        for (double kap = 0.0; kap <= 0.120001; kap += 0.0025) {
            const MarketParams p = base.with_kappa(kap);
            IntensityProfile prof = bench;
            prof.kappa = kap;
            const std::vector<double> rv = relative_volatility(prof, bench, p, grid);
            f.row({kap, interp_linear(grid.nodes, rv, ts[0]),
                   interp_linear(grid.nodes, rv, ts[1]),
                   interp_linear(grid.nodes, rv, ts[2])});
        }
    }

    // fig10 / fig11: rv over time at fixed kappa
    for (auto [kap, name] : {std::pair{0.07, "fig10_rv_t.csv"},
                             std::pair{0.09, "fig11_rv_t.csv"}}) {
        const MarketParams p = base.with_kappa(kap);
        IntensityProfile prof = bench;
        prof.kappa = kap;
        const std::vector<double> rv = relative_volatility(prof, bench, p, grid);
        CsvWriter f(detail::out_path(man, name).string());
        f.comment("rv(t, " + fmt12(kap) + "), benchmark intensity");
        f.header({"t", "rv"});
        for (std::size_t i = 0; i < grid.size(); ++i) f.row({grid.nodes[i], rv[i]});
    }
}

struct OracleCheck {
    std::string name;
    double t = 0.0;
    double sample = 0.0;
    double se = 0.0;
    double target = 0.0;
    double zscore = 0.0;
    bool pass = false;
};

// The full 3-standard-error oracle battery against the analytic formulas
// for one fee slope. Zero-sum and the deterministic-gamma consistency are
// absolute checks rather than z-scores.
inline std::vector<OracleCheck> oracle_checks(const SimulationBatch& batch,
                                              const IntensityProfile& prof,
                                              const MarketParams& params,
                                              const TimeGrid& grid) {
    std::vector<OracleCheck> checks;
    const std::vector<ProbeEstimates> est = estimate_moments(batch);
    const std::vector<double> V = order_flow_variance(prof.beta, params, grid);
    const ProfitCurves pc = profit_curves(prof, params, grid);
    const MetricCurves mc = informativeness(prof, params, grid);

    auto push = [&](const std::string& name, double t, double sample, double se,
                    double target) {
        OracleCheck c;
        c.name = name;
        c.t = t;
        c.sample = sample;
        c.se = se;
        c.target = target;
        c.zscore = (sample - target) / se;
        c.pass = std::abs(c.zscore) <= 3.0;
        checks.push_back(c);
    };

    for (const auto& r : est) {
        push("mean_y", r.t, r.mean_y, r.se_mean_y, 0.0);
        push("var_y", r.t, r.var_y, r.se_var_y, interp_linear(grid.nodes, V, r.t));
        push("cov_vm_y", r.t, r.cov_vmy, r.se_cov_vmy, 0.0);
        push("w_insider", r.t, r.mean_w_insider, r.se_w_insider,
             params.w0_insider + interp_linear(grid.nodes, pc.insider, r.t));
        push("w_mm", r.t, r.mean_w_mm, r.se_w_mm,
             params.w0_mm + interp_linear(grid.nodes, pc.market_maker, r.t));
        push("corr_vp", r.t, r.corr_vp, r.se_corr_vp,
             interp_linear(grid.nodes, mc.rho_vp, r.t));
        push("m_martingale", r.t, r.mean_dm, r.se_dm, 0.0);
    }

    {
        OracleCheck c;
        c.name = "zero_sum";
        c.sample = batch.max_zero_sum_violation;
        c.target = 0.0;
        c.se = 0.0;
        c.zscore = 0.0;
        c.pass = batch.max_zero_sum_violation <= 1e-10;
        checks.push_back(c);
    }
    {
        // Euler gamma against the closed form, O(dt) agreement
        const std::vector<double> gamma = gamma_of_beta(prof.beta, params, grid);
        double worst = 0.0;
        for (std::size_t j = 0; j < batch.sim_times.size(); j += 16)
            worst = std::max(worst,
                             std::abs(batch.gamma_euler[j] -
                                      interp_linear(grid.nodes, gamma, batch.sim_times[j])));
        const double dt = batch.sim_times[1] - batch.sim_times[0];
        OracleCheck c;
        c.name = "gamma_euler_consistency";
        c.sample = worst;
        c.target = 0.0;
        c.se = 0.0;
        c.zscore = 0.0;
        c.pass = worst <= 5.0 * dt;  // O(h) bound, generous constant
        checks.push_back(c);
    }
    const ConvergenceReport rep = convergence_check(batch, prof, params, grid);
    for (const auto& row : rep.rows) {
        OracleCheck c;
        c.name = "mse_vs_S";
        c.t = row.t;
        c.sample = row.sample_mse;
        c.se = row.se;
        c.target = row.analytic_S;
        c.zscore = row.zscore;
        c.pass = std::abs(row.zscore) <= 3.0;
        checks.push_back(c);
    }
    {
        OracleCheck c;
        c.name = "S_decreasing";
        c.pass = rep.analytic_S_decreasing;
        c.zscore = 0.0;
        checks.push_back(c);
    }
    return checks;
}

// Returns the number of failed oracle checks across all requested kappas.
inline int cmd_simulate(const RunManifest& man) {
    const MarketParams& base = man.config.params;
    const TimeGrid grid = make_uniform_grid(base, man.config.n_grid, man.config.epsilon_fraction);
    SimulationSpec spec;
    spec.n_paths = man.n_paths;
    spec.n_steps = man.n_steps;
    spec.seed = man.seed;

    int failures = 0;
    for (double kap : man.kappas) {
        const MarketParams p = base.with_kappa(kap);
        const IntensityProfile prof = solve_equilibrium(p, grid, detail::solve_options(man));
        const SimulationBatch batch = simulate_paths(prof, p, grid, spec);
        const std::vector<ProbeEstimates> est = estimate_moments(batch);
        const std::string tag = detail::kappa_tag(kap);

        CsvWriter ef(detail::out_path(man, "estimators_" + tag + ".csv").string());
        ef.header({"t", "mean_y", "se_mean_y", "var_y", "se_var_y", "cov_vm_y",
                   "se_cov_vm_y", "corr_my", "se_corr_my", "corr_vp", "se_corr_vp",
                   "var_p", "se_var_p", "mse_vp", "se_mse_vp", "w_insider",
                   "se_w_insider", "w_mm", "se_w_mm"});
        for (const auto& r : est)
            ef.row({r.t, r.mean_y, r.se_mean_y, r.var_y, r.se_var_y, r.cov_vmy,
                    r.se_cov_vmy, r.corr_my, r.se_corr_my, r.corr_vp, r.se_corr_vp,
                    r.var_p, r.se_var_p, r.mse_vp, r.se_mse_vp, r.mean_w_insider,
                    r.se_w_insider, r.mean_w_mm, r.se_w_mm});

        const std::vector<OracleCheck> checks = oracle_checks(batch, prof, p, grid);
        CsvWriter cf(detail::out_path(man, "checks_" + tag + ".csv").string());
        cf.header({"check", "t", "sample", "se", "target", "z", "pass"});
        for (const auto& c : checks) {
            cf.row_strings({c.name, fmt12(c.t), fmt12(c.sample), fmt12(c.se),
                            fmt12(c.target), fmt12(c.zscore), c.pass ? "1" : "0"});
            if (!c.pass) ++failures;
        }

        if (man.dump_wealth) {
            CsvWriter wf(detail::out_path(man, "wealth_" + tag + ".csv").string());
            wf.header({"path", "w_insider", "w_mm", "w_noise"});
            for (std::size_t i = 0; i < batch.terminal_wealth.size(); ++i)
                wf.row({static_cast<double>(i), batch.terminal_wealth[i][0],
                        batch.terminal_wealth[i][1], batch.terminal_wealth[i][2]});
        }
    }
    return failures;
}

}  // namespace kylefee
