#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kylefee/model.hpp"
#include "kylefee/moments.hpp"
#include "kylefee/quadrature.hpp"
#include "kylefee/solver.hpp"

namespace kylefee {

// Net expected profits through time t for the three participants.
// insider + market_maker + noise == 0 at every node by construction.
struct ProfitCurves {
    std::vector<double> insider;
    std::vector<double> market_maker;
    std::vector<double> noise;
    double kappa = 0.0;
};

// Terminal insider profit J^I - w0 = int_0^T beta (gamma + k^2 V) dt.
// Quadrature runs to T-eps; the tail extends beta*gamma as a constant
// (the product stays bounded in the Kyle limit) and beta*k^2*V by the
// triangle rule (it vanishes linearly at T).
inline double insider_profit_terminal(const std::vector<double>& beta,
                                      const MarketParams& params,
                                      const TimeGrid& grid) {
    const std::size_t n = grid.size();
    const double eps = grid.terminal_margin;
    const std::vector<double> k = fee_schedule(params, grid);
    const std::vector<double> gamma = gamma_of_beta(beta, params, grid);
    const MomentSet mom = order_flow_moments(beta, params, grid);

    std::vector<double> bg(n), bkv(n);
    for (std::size_t i = 0; i < n; ++i) {
        bg[i] = beta[i] * gamma[i];
        bkv[i] = beta[i] * k[i] * k[i] * mom.variance[i];
    }
    std::vector<double> sum(n);
    for (std::size_t i = 0; i < n; ++i) sum[i] = bg[i] + bkv[i];
    return trapz(grid.nodes, sum) + bg[n - 1] * eps + 0.5 * bkv[n - 1] * eps;
}

// Market-maker terminal profit with the matching tail: kappa*V tends to a
// bounded constant while k^2 V beta vanishes linearly at T.
inline double market_maker_profit_terminal(const std::vector<double>& beta,
                                           const MarketParams& params,
                                           const TimeGrid& grid) {
    const std::size_t n = grid.size();
    const double eps = grid.terminal_margin;
    const std::vector<double> k = fee_schedule(params, grid);
    const MomentSet mom = order_flow_moments(beta, params, grid);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = k[i] * k[i] * mom.variance[i] * beta[i] + params.kappa * mom.variance[i];
    const double tail = params.kappa * mom.variance[n - 1] * eps +
                        0.5 * k[n - 1] * k[n - 1] * mom.variance[n - 1] * beta[n - 1] * eps;
    return trapz(grid.nodes, f) + tail;
}

// E(w_t^M) - w0 = int_0^t (k^2 V beta + kappa V) ds, a nonnegative integrand.
inline std::vector<double> market_maker_profit_curve(const std::vector<double>& beta,
                                                     const MarketParams& params,
                                                     const TimeGrid& grid) {
    const std::size_t n = grid.size();
    const std::vector<double> k = fee_schedule(params, grid);
    const MomentSet mom = order_flow_moments(beta, params, grid);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = k[i] * k[i] * mom.variance[i] * beta[i] + params.kappa * mom.variance[i];
    return cumtrapz(grid.nodes, f);
}

// Insider profit at interior times. Expanding E[(v-p_t)(v-p_s)] for s <= t
// gives gamma_t + k_t k_s C(t,s) minus the cross moment
// E[(v-m_s) y_t] = e(t)^-1 int_s^t beta gamma e du  (it solves
// g' = beta gamma - k beta g with g(s) = 0), so
//   p_I(t) = int_0^t (gamma + k^2 V) beta
//            - gamma_t int_0^t beta
//            + (k_t/e_t) [ int_0^t beta_s (P_t - P_s) ds - int_0^t k beta e V ds ],
// with P = int_0^. beta gamma e. The cross moment is NOT zero at kappa > 0;
// seeded Monte Carlo accounting pins this form (and rejects dropping it).
inline std::vector<double> insider_profit_curve(const std::vector<double>& beta,
                                                const MarketParams& params,
                                                const TimeGrid& grid) {
    const std::size_t n = grid.size();
    const std::vector<double> k = fee_schedule(params, grid);
    const std::vector<double> gamma = gamma_of_beta(beta, params, grid);
    const MomentSet mom = order_flow_moments(beta, params, grid);

    std::vector<double> f1(n), bge(n), kbev(n);
    for (std::size_t i = 0; i < n; ++i) {
        f1[i] = (gamma[i] + k[i] * k[i] * mom.variance[i]) * beta[i];
        bge[i] = beta[i] * gamma[i] * mom.e_factor[i];
        kbev[i] = k[i] * beta[i] * mom.e_factor[i] * mom.variance[i];
    }
    const std::vector<double> term1 = cumtrapz(grid.nodes, f1);
    const std::vector<double> cumbeta = cumtrapz(grid.nodes, beta);
    const std::vector<double> P = cumtrapz(grid.nodes, bge);
    std::vector<double> bP(n);
    for (std::size_t i = 0; i < n; ++i) bP[i] = beta[i] * P[i];
    const std::vector<double> A = cumtrapz(grid.nodes, bP);
    const std::vector<double> kev = cumtrapz(grid.nodes, kbev);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double cross = P[i] * cumbeta[i] - A[i];
        out[i] = term1[i] - gamma[i] * cumbeta[i] +
                 (k[i] / mom.e_factor[i]) * (cross - kev[i]);
    }
    return out;
}

inline std::vector<double> noise_trader_profit_curve(const std::vector<double>& insider,
                                                     const std::vector<double>& mm) {
    if (insider.size() != mm.size())
        throw config_error("profit curves live on different grids");
    std::vector<double> out(insider.size());
    for (std::size_t i = 0; i < insider.size(); ++i) out[i] = -(insider[i] + mm[i]);
    return out;
}

inline ProfitCurves profit_curves(const IntensityProfile& profile,
                                  const MarketParams& params, const TimeGrid& grid) {
    ProfitCurves pc;
    pc.kappa = params.kappa;
    pc.insider = insider_profit_curve(profile.beta, params, grid);
    pc.market_maker = market_maker_profit_curve(profile.beta, params, grid);
    pc.noise = noise_trader_profit_curve(pc.insider, pc.market_maker);
    return pc;
}

}  // namespace kylefee
