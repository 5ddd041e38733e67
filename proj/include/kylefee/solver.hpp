#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kylefee/model.hpp"
#include "kylefee/moments.hpp"
#include "kylefee/quadrature.hpp"

namespace kylefee {

// Trading intensity beta_t on the grid plus solver diagnostics.
struct IntensityProfile {
    std::vector<double> beta;
    double kappa = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;
};

struct SolveOptions {
    double tolerance = 1e-8;
    int max_iter = 200;
    double damping = 0.5;
    // > 0: run exactly this many plain (undamped) updates, as in the paper's
    // two-round procedure; 0: iterate to tolerance with damping.
    int iter_limit = 0;
};

// Filter error gamma_t = sigma_v^2 / (1 + sigma_v^2 int_0^t (beta/sigma)^2).
// The running integral uses the parabolic rule: near the open end the Kyle
// integrand grows like (T-s)^-2 and the trapezoid's O(h^2) error there is
// larger than the 1e-6 budget on gamma.
inline std::vector<double> gamma_of_beta(const std::vector<double>& beta,
                                         const MarketParams& params,
                                         const TimeGrid& grid) {
    detail::require_nonnegative(beta);
    const std::size_t n = grid.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = params.sigma(grid.nodes[i]);
        f[i] = (beta[i] / s) * (beta[i] / s);
    }
    const std::vector<double> I = cum_parabolic(grid.nodes, f);
    const double g0 = params.sigma_v * params.sigma_v;
    std::vector<double> gamma(n);
    for (std::size_t i = 0; i < n; ++i) gamma[i] = g0 / (1.0 + g0 * I[i]);
    return gamma;
}

namespace detail {

// int_t^T sigma^2 ds at every node plus the total over [0, T]; analytic for
// constant sigma, fine per-segment Simpson otherwise.
inline std::vector<double> sigma2_tail(const MarketParams& params, const TimeGrid& grid) {
    const std::size_t n = grid.size();
    std::vector<double> tail(n);
    if (params.constant_sigma()) {
        const double s2 = params.sigma_const * params.sigma_const;
        for (std::size_t i = 0; i < n; ++i)
            tail[i] = s2 * (params.horizon - grid.nodes[i]);
        return tail;
    }
    auto simpson = [&](double a, double b) {
        const int m = 16;
        const double h = (b - a) / m;
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
            const double x0 = a + j * h, x2 = x0 + h, x1 = 0.5 * (x0 + x2);
            auto s2 = [&](double x) { const double s = params.sigma(x); return s * s; };
            acc += (h / 6.0) * (s2(x0) + 4.0 * s2(x1) + s2(x2));
        }
        return acc;
    };
    double acc = simpson(grid.back(), params.horizon);
    tail[n - 1] = acc;
    for (std::size_t i = n - 1; i > 0; --i) {
        acc += simpson(grid.nodes[i - 1], grid.nodes[i]);
        tail[i - 1] = acc;
    }
    return tail;
}

}  // namespace detail

// Closed-form optimal intensity when kappa = 0 (the Kyle benchmark):
// beta0_t = sigma_t^2 sqrt(int_0^T sigma^2) / (sigma_v int_t^T sigma^2).
inline IntensityProfile kyle_beta0(const MarketParams& params, const TimeGrid& grid) {
    validate(params);
    const std::vector<double> tail = detail::sigma2_tail(params, grid);
    const double norm = std::sqrt(tail[0]);  // tail[0] = int_0^T sigma^2
    IntensityProfile prof;
    prof.kappa = 0.0;
    prof.converged = true;
    prof.beta.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = params.sigma(grid.nodes[i]);
        prof.beta[i] = s * s * norm / (params.sigma_v * tail[i]);
    }
    return prof;
}

// Right-hand side of the equilibrium integral equation:
//   rhs_t = sigma_t^2 / (2 int_t^T gamma^2 beta) *
//           ( gamma_t - V(t) (k_t^2 + 2 k_t int_t^T beta k^2 e^{-2 int_t^s k beta}) ).
// All int_t^T pieces run to T-eps and are closed by the Kyle-limit tail:
// gamma^2 beta and beta k^2 e^{-2K} both vanish linearly at T (gamma ~ T-t,
// beta ~ 1/(T-t), k ~ T-t), so each tail is (last node value) * eps / 2.
inline std::vector<double> fixed_point_rhs(const std::vector<double>& beta,
                                           const MarketParams& params,
                                           const TimeGrid& grid) {
    const std::size_t n = grid.size();
    const double eps = grid.terminal_margin;
    const std::vector<double> k = fee_schedule(params, grid);
    const std::vector<double> gamma = gamma_of_beta(beta, params, grid);
    const MomentSet mom = order_flow_moments(beta, params, grid);

    std::vector<double> g2b(n), bk2e(n);
    for (std::size_t i = 0; i < n; ++i) {
        g2b[i] = gamma[i] * gamma[i] * beta[i];
        bk2e[i] = beta[i] * k[i] * k[i] * std::exp(-2.0 * mom.log_e[i]);
    }
    std::vector<double> D = revcumtrapz(grid.nodes, g2b);
    std::vector<double> R = revcumtrapz(grid.nodes, bk2e);
    const double tail_D = 0.5 * g2b[n - 1] * eps;
    const double tail_R = 0.5 * bk2e[n - 1] * eps;

    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double denom = D[i] + tail_D;
        if (denom < 1e-14)
            throw solver_error("degenerate denominator in the intensity equation at t = " +
                               std::to_string(grid.nodes[i]));
        const double J = std::exp(2.0 * mom.log_e[i]) * (R[i] + tail_R);
        const double bracket =
            gamma[i] - mom.variance[i] * (k[i] * k[i] + 2.0 * k[i] * J);
        if (bracket <= 0.0)
            throw solver_error("negative intensity: fee slope kappa = " +
                               std::to_string(params.kappa) +
                               " admits no interior solution (bracket <= 0 at t = " +
                               std::to_string(grid.nodes[i]) + ")");
        const double s = params.sigma(grid.nodes[i]);
        rhs[i] = s * s * bracket / (2.0 * denom);
    }
    return rhs;
}

// Damped fixed-point iteration started from the Kyle benchmark. kappa = 0
// short-circuits to the closed form. With iter_limit set, runs plain Picard
// rounds mirroring the paper's procedure and reports the defect reached.
inline IntensityProfile solve_equilibrium(const MarketParams& params,
                                          const TimeGrid& grid,
                                          const SolveOptions& opts = {}) {
    validate(params);
    IntensityProfile prof = kyle_beta0(params, grid);
    prof.kappa = params.kappa;
    if (params.kappa == 0.0) return prof;

    const std::size_t n = grid.size();
    if (opts.iter_limit > 0) {
        for (int it = 0; it < opts.iter_limit; ++it) {
            prof.beta = fixed_point_rhs(prof.beta, params, grid);
            prof.iterations = it + 1;
        }
        const std::vector<double> r = fixed_point_rhs(prof.beta, params, grid);
        double defect = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            defect = std::max(defect, std::abs(r[i] - prof.beta[i]));
        prof.residual = defect;
        prof.residual_history.push_back(defect);
        prof.converged = defect <= opts.tolerance;
        return prof;
    }

    double d = opts.damping;
    std::vector<double> delta_prev;
    for (int it = 0; it < opts.max_iter; ++it) {
        const std::vector<double> r = fixed_point_rhs(prof.beta, params, grid);
        std::vector<double> delta(n);
        double defect = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            delta[i] = r[i] - prof.beta[i];
            defect = std::max(defect, std::abs(delta[i]));
        }
        prof.residual = defect;
        prof.residual_history.push_back(defect);
        prof.iterations = it;
        if (defect <= opts.tolerance) {
            prof.converged = true;
            return prof;
        }
        if (!delta_prev.empty()) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += delta[i] * delta_prev[i];
            if (dot < 0.0) d = std::max(d * 0.5, 1.0 / 64.0);  // oscillation guard
        }
        for (std::size_t i = 0; i < n; ++i) prof.beta[i] += d * delta[i];
        delta_prev = std::move(delta);
    }
    throw solver_error("no convergence after " + std::to_string(opts.max_iter) +
                       " iterations (defect " + std::to_string(prof.residual) +
                       ", kappa " + std::to_string(params.kappa) + ")");
}

}  // namespace kylefee
