#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "kylefee/model.hpp"
#include "kylefee/quadrature.hpp"

namespace kylefee {

// First and second moments of the aggregate order flow y under (k, beta):
//   e(t) = exp(int_0^t k beta)
//   V(t) = E(y_t^2) = e(t)^-2 int_0^t sigma^2 e^2
//   E(y_t) = y0 / e(t)
struct MomentSet {
    std::vector<double> e_factor;
    std::vector<double> variance;
    std::vector<double> mean;
    std::vector<double> log_e;  // int_0^t k beta, kept for interpolation
};

namespace detail {
inline void require_nonnegative(const std::vector<double>& beta) {
    for (double b : beta)
        if (b < 0.0) throw config_error("beta must be nonnegative on the grid");
}
}  // namespace detail

inline MomentSet order_flow_moments(const std::vector<double>& beta,
                                    const MarketParams& params,
                                    const TimeGrid& grid, double y0 = 0.0) {
    detail::require_nonnegative(beta);
    const std::size_t n = grid.size();
    const std::vector<double> k = fee_schedule(params, grid);

    std::vector<double> kbeta(n);
    for (std::size_t i = 0; i < n; ++i) kbeta[i] = k[i] * beta[i];
    const std::vector<double> K = cumtrapz(grid.nodes, kbeta);

    std::vector<double> integrand(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = params.sigma(grid.nodes[i]);
        integrand[i] = s * s * std::exp(2.0 * K[i]);
    }
    const std::vector<double> W = cumtrapz(grid.nodes, integrand);

    MomentSet m;
    m.log_e = K;
    m.e_factor.resize(n);
    m.variance.resize(n);
    m.mean.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.e_factor[i] = std::exp(K[i]);
        m.variance[i] = std::exp(-2.0 * K[i]) * W[i];
        m.mean[i] = y0 * std::exp(-K[i]);
    }
    return m;
}

inline std::vector<double> order_flow_variance(const std::vector<double>& beta,
                                               const MarketParams& params,
                                               const TimeGrid& grid) {
    return order_flow_moments(beta, params, grid).variance;
}

inline std::vector<double> order_flow_mean(const std::vector<double>& beta,
                                           const MarketParams& params,
                                           const TimeGrid& grid, double y0) {
    return order_flow_moments(beta, params, grid, y0).mean;
}

// C(s,t) = V(min) e(min)/e(max); equals V(t) on the diagonal. Off-grid times
// interpolate log e and V linearly, which keeps the result positive.
inline double order_flow_covariance(const MomentSet& m, const TimeGrid& grid,
                                    double s, double t) {
    if (s < grid.front() - 1e-12 || t < grid.front() - 1e-12 ||
        s > grid.back() + 1e-12 || t > grid.back() + 1e-12)
        throw config_error("covariance times outside the grid range");
    const double lo = std::min(s, t), hi = std::max(s, t);
    const double v_lo = interp_linear(grid.nodes, m.variance, lo);
    const double K_lo = interp_linear(grid.nodes, m.log_e, lo);
    const double K_hi = interp_linear(grid.nodes, m.log_e, hi);
    return v_lo * std::exp(K_lo - K_hi);
}

inline double order_flow_covariance(const std::vector<double>& beta,
                                    const MarketParams& params,
                                    const TimeGrid& grid, double s, double t) {
    return order_flow_covariance(order_flow_moments(beta, params, grid), grid, s, t);
}

}  // namespace kylefee
