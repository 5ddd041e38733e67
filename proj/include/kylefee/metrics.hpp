#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kylefee/model.hpp"
#include "kylefee/moments.hpp"
#include "kylefee/quadrature.hpp"
#include "kylefee/solver.hpp"

namespace kylefee {

// Regulator-facing curves at one fee slope.
struct MetricCurves {
    std::vector<double> rv;      // relative volatility (empty unless requested)
    std::vector<double> iota;    // price informativeness, = rho_vp^2
    std::vector<double> rho_vp;  // corr(v, p_t)
    std::vector<double> rho_my;  // corr(m_t, y_t)
    std::vector<double> var_p;
    std::vector<double> var_m;   // sigma_v^2 - gamma_t
    double kappa = 0.0;
};

// rv(t,kappa) = sqrt( gamma_t(beta)/gamma_t(beta0) + k_t^2 V(t)/gamma_t(beta0) ),
// evaluated at whatever intensity profile the caller supplies. With
// beta_k == beta0 and kappa = 0 this is exactly 1 at every node.
inline std::vector<double> relative_volatility(const IntensityProfile& beta_k,
                                               const IntensityProfile& beta_0,
                                               const MarketParams& params,
                                               const TimeGrid& grid) {
    if (beta_k.kappa != params.kappa)
        throw config_error("profile kappa does not match params.kappa");
    if (beta_0.kappa != 0.0)
        throw config_error("benchmark profile must carry kappa = 0");
    const std::size_t n = grid.size();
    const std::vector<double> k = fee_schedule(params, grid);
    const std::vector<double> g_k = gamma_of_beta(beta_k.beta, params, grid);
    const std::vector<double> g_0 = gamma_of_beta(beta_0.beta, params, grid);
    const std::vector<double> V = order_flow_variance(beta_k.beta, params, grid);
    std::vector<double> rv(n);
    for (std::size_t i = 0; i < n; ++i)
        rv[i] = std::sqrt(g_k[i] / g_0[i] + k[i] * k[i] * V[i] / g_0[i]);
    return rv;
}

// Correlations, price variances and informativeness at the supplied beta.
// At t = 0 both correlations are 0/0; they are reported as their right
// limits taken from the first interior node.
inline MetricCurves informativeness(const IntensityProfile& profile,
                                    const MarketParams& params,
                                    const TimeGrid& grid) {
    const std::size_t n = grid.size();
    const std::vector<double> k = fee_schedule(params, grid);
    const std::vector<double> gamma = gamma_of_beta(profile.beta, params, grid);
    const std::vector<double> V = order_flow_variance(profile.beta, params, grid);
    const double s2v = params.sigma_v * params.sigma_v;

    MetricCurves mc;
    mc.kappa = params.kappa;
    mc.var_m.resize(n);
    mc.var_p.resize(n);
    mc.rho_my.resize(n);
    mc.rho_vp.resize(n);
    mc.iota.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        mc.var_m[i] = s2v - gamma[i];
        if (i == 0) continue;
        const double sig = params.sigma(grid.nodes[i]);
        const double sd_m = std::sqrt(std::max(mc.var_m[i], 0.0));
        const double sd_y = std::sqrt(std::max(V[i], 0.0));
        const double rho_my = profile.beta[i] * gamma[i] * sd_y / (sig * sig * sd_m);
        const double cov_vp = mc.var_m[i] + k[i] * rho_my * sd_m * sd_y;
        const double var_p = mc.var_m[i] + k[i] * k[i] * V[i] + 2.0 * k[i] * rho_my * sd_m * sd_y;
        const double rho_vp = cov_vp / (params.sigma_v * std::sqrt(var_p));
        if (std::abs(rho_my) > 1.0 + 1e-8 || std::abs(rho_vp) > 1.0 + 1e-8)
            throw solver_error("correlation left [-1,1]: inconsistent beta/moment inputs");
        mc.rho_my[i] = std::clamp(rho_my, -1.0, 1.0);
        mc.rho_vp[i] = std::clamp(rho_vp, -1.0, 1.0);
        mc.var_p[i] = var_p;
        mc.iota[i] = mc.rho_vp[i] * mc.rho_vp[i];
    }
    mc.rho_my[0] = mc.rho_my[1];
    mc.rho_vp[0] = mc.rho_vp[1];
    mc.var_p[0] = mc.var_m[0];  // V(0) = 0
    mc.iota[0] = mc.rho_vp[0] * mc.rho_vp[0];
    return mc;
}

// Which intensity enters the regulator's rv evaluation. The paper's
// Figs 9-11/Table 2 numbers use the Kyle benchmark under the kappa fee
// schedule; the equilibrium mode re-solves beta(kappa) per evaluation.
enum class RvIntensity { benchmark, equilibrium };

struct RegulatorOptions {
    double kappa_max = 0.12;
    double tol = 5e-5;
    int max_bisect = 200;
    RvIntensity intensity = RvIntensity::benchmark;
    SolveOptions solve;
};

inline double sup_relative_volatility(double kappa, const MarketParams& params,
                                      const TimeGrid& grid,
                                      RvIntensity mode = RvIntensity::benchmark,
                                      const SolveOptions& sopts = {}) {
    const MarketParams pk = params.with_kappa(kappa);
    IntensityProfile bench = kyle_beta0(params, grid);
    IntensityProfile prof;
    if (mode == RvIntensity::benchmark || kappa == 0.0) {
        prof = bench;
        prof.kappa = kappa;
    } else {
        prof = solve_equilibrium(pk, grid, sopts);
    }
    const std::vector<double> rv = relative_volatility(prof, bench, pk, grid);
    double sup = 1.0;  // analytic limits at t=0 and t->T are both 1
    for (double x : rv) sup = std::max(sup, x);
    return sup;
}

// kappa* solving sup_t rv(t, kappa*) = rv_star by bisection on a map that is
// checked for monotonicity at every step rather than assumed.
inline double regulator_inverse_map(double rv_star, const MarketParams& params,
                                    const TimeGrid& grid,
                                    const RegulatorOptions& opts = {}) {
    if (!(rv_star > 1.0))
        throw config_error("rv target must exceed 1");
    auto f = [&](double kap) {
        return sup_relative_volatility(kap, params, grid, opts.intensity, opts.solve);
    };
    double lo = 0.0, f_lo = 1.0;
    double hi = opts.kappa_max, f_hi = f(hi);
    if (f_hi < rv_star)
        throw solver_error("target unreachable: sup rv(kappa_max) = " +
                           std::to_string(f_hi) + " < rv* = " + std::to_string(rv_star));
    for (int it = 0; it < opts.max_bisect; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid < f_lo - 1e-12 || f_mid > f_hi + 1e-12)
            throw solver_error("non-monotone bracket in the regulator map at kappa = " +
                               std::to_string(mid));
        if (std::abs(f_mid - rv_star) <= opts.tol) return mid;
        if (f_mid < rv_star) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace kylefee
