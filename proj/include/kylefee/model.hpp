#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kylefee {

// Bad user input: config files, parameter ranges, grid construction.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure inside the solver or the regulator map.
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exogenous market model: liquidation-value law, noise volatility, horizon
// and the fee slope kappa of the price rule p = m + k_t y, k_t = kappa (T - t).
struct MarketParams {
    double mu_v = 0.0;
    double sigma_v = 0.0;
    double horizon = 0.0;
    double kappa = 0.0;
    double w0_insider = 0.0;
    double w0_mm = 0.0;
    double w0_noise = 0.0;

    // Noise-trade volatility rate. Constant unless sigma_fn is set.
    double sigma_const = 0.0;
    std::function<double(double)> sigma_fn;

    bool constant_sigma() const { return !static_cast<bool>(sigma_fn); }
    double sigma(double t) const { return sigma_fn ? sigma_fn(t) : sigma_const; }

    MarketParams with_kappa(double k) const {
        MarketParams p = *this;
        p.kappa = k;
        return p;
    }
};

inline MarketParams make_params(double sigma, double sigma_v, double horizon,
                                double kappa = 0.0, double mu_v = 0.0) {
    MarketParams p;
    p.sigma_const = sigma;
    p.sigma_v = sigma_v;
    p.horizon = horizon;
    p.kappa = kappa;
    p.mu_v = mu_v;
    return p;
}

inline void validate(const MarketParams& p) {
    if (!(p.sigma_v > 0.0)) throw config_error("sigma_v must be positive");
    if (!(p.horizon > 0.0)) throw config_error("horizon must be positive");
    if (!(p.kappa >= 0.0)) throw config_error("kappa must be nonnegative");
    if (p.constant_sigma() && !(p.sigma_const > 0.0))
        throw config_error("sigma must be positive");
}

// Discretization of [0, T - eps]: the terminal node stays strictly inside
// [0, T) because the Kyle intensity diverges at the horizon.
struct TimeGrid {
    std::vector<double> nodes;
    std::vector<double> weights;  // trapezoidal, sum = T - eps
    double terminal_margin = 0.0;

    std::size_t size() const { return nodes.size(); }
    double front() const { return nodes.front(); }
    double back() const { return nodes.back(); }
    double step() const { return nodes[1] - nodes[0]; }
};

inline TimeGrid make_uniform_grid(const MarketParams& params, std::size_t n,
                                  double epsilon_fraction) {
    validate(params);
    if (n < 8) throw config_error("grid needs at least 8 nodes");
    if (!(epsilon_fraction > 0.0) || !(epsilon_fraction < 1.0))
        throw config_error("epsilon_fraction must lie in (0,1)");

    const double T = params.horizon;
    const double span = T * (1.0 - epsilon_fraction);
    const double h = span / static_cast<double>(n - 1);

    TimeGrid g;
    g.terminal_margin = T - span;
    g.nodes.resize(n);
    g.weights.assign(n, h);
    for (std::size_t i = 0; i < n; ++i)
        g.nodes[i] = h * static_cast<double>(i);
    g.nodes.back() = span;
    g.weights.front() = 0.5 * h;
    g.weights.back() = 0.5 * h;

    for (std::size_t i = 0; i < n; ++i)
        if (!(params.sigma(g.nodes[i]) > 0.0))
            throw config_error("sigma(t) must be positive at every grid node");
    return g;
}

// k_t = kappa (T - t), nonincreasing with k_T = 0.
inline std::vector<double> fee_schedule(const MarketParams& params, const TimeGrid& grid) {
    std::vector<double> k(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        k[i] = params.kappa * (params.horizon - grid.nodes[i]);
    return k;
}

inline std::vector<double> sigma_curve(const MarketParams& params, const TimeGrid& grid) {
    std::vector<double> s(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s[i] = params.sigma(grid.nodes[i]);
    return s;
}

}  // namespace kylefee
