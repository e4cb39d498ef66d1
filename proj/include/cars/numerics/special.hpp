#pragma once

#include <cmath>
#include <stdexcept>

namespace cars::numerics {

/// ln(k!) through lgamma; exact table for small k.
inline double log_factorial(int k) {
    if (k < 0) throw std::domain_error("log_factorial: negative argument");
    if (k < 2) return 0.0;
    if (k <= 20) {
        double acc = 0.0;
        for (int j = 2; j <= k; ++j) acc += std::log(static_cast<double>(j));
        return acc;
    }
    return std::lgamma(static_cast<double>(k) + 1.0);
}

/// Physicists' Hermite polynomial H_n(x) by upward recurrence.
inline double hermite(int n, double x) {
    if (n < 0) throw std::domain_error("hermite: negative order");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * cur - 2.0 * k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// sinh(u) - u without cancellation for small |u|.
inline double sinh_minus_identity(double u) {
    if (std::abs(u) < 1.0) {
        // u^3/3! + u^5/5! + ... ; 12 terms reach double precision on |u| < 1
        const double u2 = u * u;
        double term = u * u2 / 6.0;
        double acc = term;
        for (int k = 2; k < 14; ++k) {
            term *= u2 / ((2.0 * k) * (2.0 * k + 1.0));
            acc += term;
            if (std::abs(term) < 1e-18 * std::abs(acc)) break;
        }
        return acc;
    }
    return std::sinh(u) - u;
}

/// sqrt(2/pi)
inline constexpr double kSqrt2OverPi = 0.79788456080286535587989211986876;
inline constexpr double kPi = 3.14159265358979323846264338327950;
inline constexpr double kE = 2.71828182845904523536028747135266;

}  // namespace cars::numerics
