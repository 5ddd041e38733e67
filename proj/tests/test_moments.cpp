#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "kylefee/moments.hpp"
#include "kylefee/quadrature.hpp"
#include "kylefee/solver.hpp"
#include "test_common.hpp"

using namespace kylefee;

TEST_CASE("variance collapses to sigma^2 t when fees are off") {
    const MarketParams p = base_params();
    const TimeGrid g = base_grid(400);
    const IntensityProfile b0 = kyle_beta0(p, g);
    const std::vector<double> V = order_flow_variance(b0.beta, p, g);
    CHECK(V[0] == 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(V[i] == doctest::Approx(0.04 * g.nodes[i]).epsilon(1e-13));
}

TEST_CASE("V(0) = 0 and V >= 0 with fees on") {
    const MarketParams p = base_params(0.07);
    const TimeGrid g = base_grid(500);
    const IntensityProfile sol = solve_equilibrium(p, g);
    const std::vector<double> V = order_flow_variance(sol.beta, p, g);
    CHECK(V[0] == 0.0);
    for (double v : V) CHECK(v >= 0.0);
}

TEST_CASE("V satisfies dV/dt = -2 k beta V + sigma^2 at interior nodes") {
    const MarketParams p = base_params(0.045);
    const TimeGrid g = base_grid(1000);
    const IntensityProfile sol = solve_equilibrium(p, g);
    const std::vector<double> V = order_flow_variance(sol.beta, p, g);
    const std::vector<double> k = fee_schedule(p, g);
    const double h = g.step();
    const double bound = 5.0 * h * h * 0.04;  // 5 h^2 ||sigma^2||_inf
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double resid = (V[i + 1] - V[i - 1]) / (2.0 * h) +
                             2.0 * k[i] * sol.beta[i] * V[i] - 0.04;
        CHECK(std::abs(resid) <= bound);
    }
}

TEST_CASE("covariance behaves like Brownian motion when fees are off") {
    const MarketParams p = base_params();
    const TimeGrid g = base_grid(300);
    const IntensityProfile b0 = kyle_beta0(p, g);
    const MomentSet mom = order_flow_moments(b0.beta, p, g);
    for (double s : {0.4, 3.7, 8.0})
        for (double t : {1.1, 3.7, 9.2}) {
            const double c = order_flow_covariance(mom, g, s, t);
            CHECK(c == doctest::Approx(0.04 * std::min(s, t)).epsilon(1e-10));
        }
}

TEST_CASE("covariance diagonal, symmetry and consistency with e(t)") {
    const MarketParams p = base_params(0.045);
    const TimeGrid g = base_grid(400);
    const IntensityProfile sol = solve_equilibrium(p, g);
    const MomentSet mom = order_flow_moments(sol.beta, p, g);
    for (std::size_t i = 0; i < g.size(); i += 61) {
        const double t = g.nodes[i];
        CHECK(order_flow_covariance(mom, g, t, t) == doctest::Approx(mom.variance[i]).epsilon(1e-12));
    }
    for (auto [s, t] : {std::pair{1.0, 7.0}, std::pair{2.5, 9.0}, std::pair{0.3, 4.4}}) {
        const double cst = order_flow_covariance(mom, g, s, t);
        const double cts = order_flow_covariance(mom, g, t, s);
        CHECK(cst == cts);
        // C(s,t) e(max)/e(min) recovers V(min) exactly
        const double e_s = std::exp(interp_linear(g.nodes, mom.log_e, s));
        const double e_t = std::exp(interp_linear(g.nodes, mom.log_e, t));
        const double v_min = interp_linear(g.nodes, mom.variance, std::min(s, t));
        CHECK(cst * std::max(e_s, e_t) / std::min(e_s, e_t) == doctest::Approx(v_min).epsilon(1e-12));
        // Cauchy-Schwarz
        const double vs = interp_linear(g.nodes, mom.variance, s);
        const double vt = interp_linear(g.nodes, mom.variance, t);
        CHECK(cst <= std::sqrt(vs * vt) * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(order_flow_covariance(mom, g, -1.0, 2.0), config_error);
    CHECK_THROWS_AS(order_flow_covariance(mom, g, 1.0, 11.0), config_error);
}

TEST_CASE("covariance matrices on random node subsets are positive semidefinite") {
    const MarketParams p = base_params(0.045);
    const TimeGrid g = base_grid(500);
    const IntensityProfile sol = solve_equilibrium(p, g);
    const MomentSet mom = order_flow_moments(sol.beta, p, g);

    std::uint64_t state = 991;
    auto next_index = [&]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return 1 + static_cast<std::size_t>((state >> 33) % (g.size() - 1));
    };
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> ts;
        for (int j = 0; j < 8; ++j) ts.push_back(g.nodes[next_index()]);
        // Cholesky with a small pivot tolerance
        double a[8][8];
        for (int r = 0; r < 8; ++r)
            for (int c = 0; c < 8; ++c)
                a[r][c] = order_flow_covariance(mom, g, ts[r], ts[c]);
        bool ok = true;
        for (int c = 0; c < 8 && ok; ++c) {
            double d = a[c][c];
            for (int j = 0; j < c; ++j) d -= a[c][j] * a[c][j];
            if (d < -1e-10) { ok = false; break; }
            d = std::sqrt(std::max(d, 1e-30));
            a[c][c] = d;
            for (int r = c + 1; r < 8; ++r) {
                double v = a[r][c];
                for (int j = 0; j < c; ++j) v -= a[r][j] * a[c][j];
                a[r][c] = v / d;
            }
        }
        CHECK(ok);
    }
}

TEST_CASE("mean of the order flow") {
    const MarketParams p0 = base_params();
    const TimeGrid g = base_grid(300);
    const IntensityProfile b0 = kyle_beta0(p0, g);
    for (double v : order_flow_mean(b0.beta, p0, g, 0.0)) CHECK(v == 0.0);
    for (double v : order_flow_mean(b0.beta, p0, g, 1.0)) CHECK(v == 1.0);

    const MarketParams p = base_params(0.07);
    const IntensityProfile sol = solve_equilibrium(p, g);
    const std::vector<double> mean = order_flow_mean(sol.beta, p, g, 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) {
        CHECK(mean[i] > 0.0);
        CHECK(mean[i] < mean[i - 1]);
    }
}

TEST_CASE("heavy fees flatten the variance path early") {
    // No interior equilibrium exists at kappa = 0.24; the shape statement is
    // about Eq-of-motion variance at the benchmark intensity.
    const MarketParams p = base_params(0.24);
    const TimeGrid g = base_grid(1000);
    IntensityProfile bench = kyle_beta0(base_params(), g);
    const std::vector<double> V = order_flow_variance(bench.beta, p, g);
    const double h = g.step();
    auto slope_at = [&](double t) {
        const double vp = interp_linear(g.nodes, V, t + h);
        const double vm = interp_linear(g.nodes, V, t - h);
        return (vp - vm) / (2.0 * h);
    };
    CHECK(slope_at(3.0) / slope_at(0.5) < 0.25);
}
