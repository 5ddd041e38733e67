#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kylefee {

// Running trapezoidal integral: out[i] = int_{t0}^{ti} f.
inline std::vector<double> cumtrapz(const std::vector<double>& t,
                                    const std::vector<double>& f) {
    std::vector<double> out(f.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        acc += 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
        out[i] = acc;
    }
    return out;
}

// out[i] = int_{ti}^{t_last} f, accumulated from the right so the tail
// values do not carry cancellation error from the full-range total.
inline std::vector<double> revcumtrapz(const std::vector<double>& t,
                                       const std::vector<double>& f) {
    std::vector<double> out(f.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = f.size() - 1; i > 0; --i) {
        acc += 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
        out[i - 1] = acc;
    }
    return out;
}

inline double trapz(const std::vector<double>& t, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i)
        acc += 0.5 * (f[i] + f[i - 1]) * (t[i] - t[i - 1]);
    return acc;
}

// Running integral through local parabolas (cumulative Simpson). Fourth order
// on uniform grids; used where the integrand steepens toward the open end.
inline std::vector<double> cum_parabolic(const std::vector<double>& t,
                                         const std::vector<double>& f) {
    const std::size_t n = f.size();
    if (n < 3) return cumtrapz(t, f);

    // integral over [t[i], t[i+1]] of the parabola through nodes j, j+1, j+2
    auto seg = [&](std::size_t j, std::size_t i) {
        const double x0 = t[j], x1 = t[j + 1], x2 = t[j + 2];
        const double a = t[i], b = t[i + 1];
        const double d0 = (x0 - x1) * (x0 - x2);
        const double d1 = (x1 - x0) * (x1 - x2);
        const double d2 = (x2 - x0) * (x2 - x1);
        auto I = [&](double u, double p, double q) {
            // antiderivative of (x-p)(x-q) at u
            return u * u * u / 3.0 - 0.5 * (p + q) * u * u + p * q * u;
        };
        const double w0 = (I(b, x1, x2) - I(a, x1, x2)) / d0;
        const double w1 = (I(b, x0, x2) - I(a, x0, x2)) / d1;
        const double w2 = (I(b, x0, x1) - I(a, x0, x1)) / d2;
        return w0 * f[j] + w1 * f[j + 1] + w2 * f[j + 2];
    };

    std::vector<double> out(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i == 0)
            acc += seg(0, i);
        else if (i == n - 2)
            acc += seg(n - 3, i);
        else
            acc += 0.5 * (seg(i - 1, i) + seg(i, i));
        out[i + 1] = acc;
    }
    return out;
}

// Piecewise-linear interpolation, clamped at the ends.
inline double interp_linear(const std::vector<double>& t,
                            const std::vector<double>& f, double x) {
    if (t.size() != f.size() || t.empty())
        throw std::invalid_argument("interp_linear: size mismatch");
    if (x <= t.front()) return f.front();
    if (x >= t.back()) return f.back();
    std::size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (t[mid] <= x ? lo : hi) = mid;
    }
    const double w = (x - t[lo]) / (t[lo + 1] - t[lo]);
    return (1.0 - w) * f[lo] + w * f[lo + 1];
}

}  // namespace kylefee
