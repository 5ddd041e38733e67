#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kylefee/metrics.hpp"
#include "kylefee/model.hpp"
#include "kylefee/moments.hpp"
#include "kylefee/profits.hpp"
#include "kylefee/quadrature.hpp"
#include "kylefee/rng.hpp"
#include "kylefee/solver.hpp"

namespace kylefee {

struct SimulationSpec {
    int n_paths = 50000;
    int n_steps = 3960;  // Euler steps over [0, T - eps]
    std::uint64_t seed = 20260809ull;
    std::vector<double> probe_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};  // of horizon
    bool record_terminal_wealth = true;
};

// Raw per-path snapshots at the probe times plus terminal wealth triples.
struct SimulationBatch {
    double kappa = 0.0;
    SimulationSpec spec;
    std::vector<double> probe_times;             // snapped to step boundaries
    std::vector<double> v;                       // liquidation value per path
    std::vector<std::vector<double>> y, m, p;    // [probe][path]
    std::vector<std::vector<double>> w_insider, w_mm, w_noise;
    std::vector<std::vector<double>> m_prev;     // m at the previous probe
    std::vector<std::array<double, 3>> terminal_wealth;
    double max_zero_sum_violation = 0.0;
    std::vector<double> sim_times;
    std::vector<double> gamma_euler;             // dgamma = -beta^2 gamma^2 / sigma^2
};

namespace detail {

// Fixed-shape pairwise reduction; the result does not depend on how paths
// were scheduled, only on their index order.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 64) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += x[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double mean_of(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size()) / static_cast<double>(x.size());
}

inline double sd_of(const std::vector<double>& x, double mean) {
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
    return std::sqrt(pairwise_sum(sq.data(), sq.size()) /
                     static_cast<double>(x.size() - 1));
}

}  // namespace detail

// Euler-Maruyama for the coupled system
//   dy = (v - m - k y) beta dt + sigma dB
//   dm = (gamma beta / sigma^2) [ (v - m) beta dt + sigma dB ]
//   dgamma = -beta^2 gamma^2 / sigma^2 dt
// with p = m + k y, simulated as x and z components so y = x + z holds
// exactly and the per-path wealth increments x dp + z dp - y dp cancel
// identically (the zero-sum identity of the exchange economy).
inline SimulationBatch simulate_paths(const IntensityProfile& profile,
                                      const MarketParams& params,
                                      const TimeGrid& grid,
                                      const SimulationSpec& spec) {
    validate(params);
    if (spec.n_steps < 100) throw config_error("n_steps must be at least 100");
    if (spec.n_paths < 1) throw config_error("n_paths must be positive");
    if (profile.kappa != params.kappa)
        throw config_error("profile kappa does not match params.kappa");

    const int M = spec.n_steps;
    const double span = grid.back();
    const double dt = span / static_cast<double>(M);
    const double sqrt_dt = std::sqrt(dt);

    SimulationBatch batch;
    batch.kappa = params.kappa;
    batch.spec = spec;
    batch.sim_times.resize(M + 1);
    for (int j = 0; j <= M; ++j) batch.sim_times[j] = dt * static_cast<double>(j);
    batch.sim_times[M] = span;

    // curves on the simulation grid
    std::vector<double> bsim(M + 1), ksim(M + 1), ssim(M + 1);
    for (int j = 0; j <= M; ++j) {
        bsim[j] = interp_linear(grid.nodes, profile.beta, batch.sim_times[j]);
        ksim[j] = params.kappa * (params.horizon - batch.sim_times[j]);
        ssim[j] = params.sigma(batch.sim_times[j]);
    }
    // deterministic filter error, integrated with the same Euler scheme
    batch.gamma_euler.resize(M + 1);
    batch.gamma_euler[0] = params.sigma_v * params.sigma_v;
    for (int j = 0; j < M; ++j) {
        const double g = batch.gamma_euler[j];
        batch.gamma_euler[j + 1] =
            g - (bsim[j] * bsim[j] * g * g / (ssim[j] * ssim[j])) * dt;
    }

    std::vector<int> probe_steps;
    for (double frac : spec.probe_fractions) {
        int idx = static_cast<int>(std::llround(frac * params.horizon / dt));
        idx = std::min(std::max(idx, 1), M);
        probe_steps.push_back(idx);
        batch.probe_times.push_back(batch.sim_times[idx]);
    }
    const std::size_t np = probe_steps.size();
    const std::size_t n_paths = static_cast<std::size_t>(spec.n_paths);
    batch.v.resize(n_paths);
    batch.y.assign(np, std::vector<double>(n_paths));
    batch.m.assign(np, std::vector<double>(n_paths));
    batch.p.assign(np, std::vector<double>(n_paths));
    batch.m_prev.assign(np, std::vector<double>(n_paths));
    batch.w_insider.assign(np, std::vector<double>(n_paths));
    batch.w_mm.assign(np, std::vector<double>(n_paths));
    batch.w_noise.assign(np, std::vector<double>(n_paths));
    if (spec.record_terminal_wealth) batch.terminal_wealth.resize(n_paths);

    const double w0_sum = params.w0_insider + params.w0_mm + params.w0_noise;
    double worst_zero_sum = 0.0;

    for (std::size_t path = 0; path < n_paths; ++path) {
        PathRng rng(spec.seed, static_cast<std::uint64_t>(path));
        const double v = params.mu_v + params.sigma_v * rng.next_normal();
        batch.v[path] = v;

        double x = 0.0, z = 0.0, y = 0.0;
        double m = params.mu_v;
        double p = m;  // k_0 * y_0 = 0
        double wI = params.w0_insider, wM = params.w0_mm, wN = params.w0_noise;
        double m_at_last_probe = m;
        std::size_t probe = 0;

        for (int j = 0; j < M; ++j) {
            const double dW = sqrt_dt * rng.next_normal();
            const double g = batch.gamma_euler[j];
            const double xn = x + (v - p) * bsim[j] * dt;
            const double zn = z + ssim[j] * dW;
            const double mn =
                m + (g * bsim[j] / (ssim[j] * ssim[j])) * ((v - m) * bsim[j] * dt + ssim[j] * dW);
            const double yn = xn + zn;
            const double pn = mn + ksim[j + 1] * yn;
            const double dp = pn - p;
            wI += x * dp;   // holdings entering the step, executed at the new price
            wN += z * dp;
            wM += -y * dp;
            x = xn; z = zn; y = yn; m = mn; p = pn;

            while (probe < np && j + 1 == probe_steps[probe]) {
                batch.y[probe][path] = y;
                batch.m[probe][path] = m;
                batch.p[probe][path] = p;
                batch.m_prev[probe][path] = m_at_last_probe;
                batch.w_insider[probe][path] = wI;
                batch.w_mm[probe][path] = wM;
                batch.w_noise[probe][path] = wN;
                m_at_last_probe = m;
                ++probe;
            }
        }
        const double violation = std::abs(wI + wM + wN - w0_sum);
        worst_zero_sum = std::max(worst_zero_sum, violation);
        if (spec.record_terminal_wealth) batch.terminal_wealth[path] = {wI, wM, wN};
    }
    batch.max_zero_sum_violation = worst_zero_sum;
    return batch;
}

// Sample estimators with standard errors at one probe time.
struct ProbeEstimates {
    double t = 0.0;
    double mean_y = 0.0, se_mean_y = 0.0;
    double var_y = 0.0, se_var_y = 0.0;        // E(y^2) estimator
    double cov_vmy = 0.0, se_cov_vmy = 0.0;    // cov(v - m, y)
    double corr_my = 0.0, se_corr_my = 0.0;
    double corr_vp = 0.0, se_corr_vp = 0.0;
    double var_p = 0.0, se_var_p = 0.0;
    double mse_vp = 0.0, se_mse_vp = 0.0;      // E (v - p)^2
    double mean_w_insider = 0.0, se_w_insider = 0.0;
    double mean_w_mm = 0.0, se_w_mm = 0.0;
    double mean_dm = 0.0, se_dm = 0.0;         // filter increment since previous probe
};

inline std::vector<ProbeEstimates> estimate_moments(const SimulationBatch& batch) {
    if (batch.v.size() < 100)
        throw config_error("estimators need at least 100 paths");
    const std::size_t n = batch.v.size();
    const double rn = std::sqrt(static_cast<double>(n));
    std::vector<ProbeEstimates> rows;

    for (std::size_t q = 0; q < batch.probe_times.size(); ++q) {
        ProbeEstimates r;
        r.t = batch.probe_times[q];
        const auto& y = batch.y[q];
        const auto& m = batch.m[q];
        const auto& p = batch.p[q];

        r.mean_y = detail::mean_of(y);
        r.se_mean_y = detail::sd_of(y, r.mean_y) / rn;

        std::vector<double> y2(n), vm_y(n), vp2(n), dm(n);
        for (std::size_t i = 0; i < n; ++i) {
            y2[i] = y[i] * y[i];
            vm_y[i] = (batch.v[i] - m[i]) * y[i];
            vp2[i] = (batch.v[i] - p[i]) * (batch.v[i] - p[i]);
            dm[i] = m[i] - batch.m_prev[q][i];
        }
        r.var_y = detail::mean_of(y2);
        r.se_var_y = detail::sd_of(y2, r.var_y) / rn;

        const double mean_vm_y = detail::mean_of(vm_y);
        std::vector<double> vm(n);
        for (std::size_t i = 0; i < n; ++i) vm[i] = batch.v[i] - m[i];
        const double mean_vm = detail::mean_of(vm);
        r.cov_vmy = mean_vm_y - mean_vm * r.mean_y;
        r.se_cov_vmy = detail::sd_of(vm_y, mean_vm_y) / rn;

        auto corr = [&](const std::vector<double>& a, const std::vector<double>& b,
                        double& rho, double& se) {
            const double ma = detail::mean_of(a), mb = detail::mean_of(b);
            std::vector<double> ab(n);
            for (std::size_t i = 0; i < n; ++i) ab[i] = (a[i] - ma) * (b[i] - mb);
            const double cov = detail::mean_of(ab);
            const double sa = detail::sd_of(a, ma), sb = detail::sd_of(b, mb);
            rho = cov / (sa * sb);
            se = (1.0 - rho * rho) / rn;  // delta method
        };
        corr(m, y, r.corr_my, r.se_corr_my);
        corr(batch.v, p, r.corr_vp, r.se_corr_vp);

        const double mp = detail::mean_of(p);
        const double sd_p = detail::sd_of(p, mp);
        r.var_p = sd_p * sd_p;
        std::vector<double> pc2(n);
        for (std::size_t i = 0; i < n; ++i) pc2[i] = (p[i] - mp) * (p[i] - mp);
        r.se_var_p = detail::sd_of(pc2, r.var_p) / rn;

        r.mse_vp = detail::mean_of(vp2);
        r.se_mse_vp = detail::sd_of(vp2, r.mse_vp) / rn;

        r.mean_w_insider = detail::mean_of(batch.w_insider[q]);
        r.se_w_insider = detail::sd_of(batch.w_insider[q], r.mean_w_insider) / rn;
        r.mean_w_mm = detail::mean_of(batch.w_mm[q]);
        r.se_w_mm = detail::sd_of(batch.w_mm[q], r.mean_w_mm) / rn;

        r.mean_dm = detail::mean_of(dm);
        r.se_dm = detail::sd_of(dm, r.mean_dm) / rn;
        rows.push_back(r);
    }
    return rows;
}

// Price-discovery report: sample E(v - p_t)^2 against the analytic
// S_t = gamma_t + k_t^2 V(t), which must fall across probes.
struct ConvergenceRow {
    double t = 0.0;
    double sample_mse = 0.0;
    double se = 0.0;
    double analytic_S = 0.0;
    double zscore = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool analytic_S_decreasing = true;
    bool all_within_3se = true;
};

inline ConvergenceReport convergence_check(const SimulationBatch& batch,
                                           const IntensityProfile& profile,
                                           const MarketParams& params,
                                           const TimeGrid& grid) {
    const std::vector<ProbeEstimates> est = estimate_moments(batch);
    const std::vector<double> k = fee_schedule(params, grid);
    const std::vector<double> gamma = gamma_of_beta(profile.beta, params, grid);
    const std::vector<double> V = order_flow_variance(profile.beta, params, grid);
    std::vector<double> S(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        S[i] = gamma[i] + k[i] * k[i] * V[i];

    ConvergenceReport rep;
    double prev = 0.0;
    for (std::size_t q = 0; q < est.size(); ++q) {
        ConvergenceRow row;
        row.t = est[q].t;
        row.sample_mse = est[q].mse_vp;
        row.se = est[q].se_mse_vp;
        row.analytic_S = interp_linear(grid.nodes, S, est[q].t);
        row.zscore = (row.sample_mse - row.analytic_S) / row.se;
        if (q > 0 && row.analytic_S >= prev) rep.analytic_S_decreasing = false;
        if (std::abs(row.zscore) > 3.0) rep.all_within_3se = false;
        prev = row.analytic_S;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace kylefee
