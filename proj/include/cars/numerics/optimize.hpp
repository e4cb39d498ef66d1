#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cars::numerics {

struct Maximum {
    double x;
    double value;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
template <class F>
Maximum golden_section_maximize(F&& f, double lo, double hi, double x_tol) {
    if (!(hi >= lo)) throw std::invalid_argument("golden_section_maximize: empty bracket");
    constexpr double inv_phi = 0.61803398874989484820;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > x_tol) {
        if (fc >= fd) {  // ties keep the lower half
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Scans f on `grid` (ascending), brackets the best sample by its neighbours and
/// refines with golden section. `prefer(i, j)` decides ties between equal samples.
template <class F, class Prefer>
Maximum scan_then_refine(F&& f, const std::vector<double>& grid, double x_tol, Prefer&& prefer) {
    if (grid.empty()) throw std::invalid_argument("scan_then_refine: empty grid");
    std::size_t best = 0;
    double best_value = f(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double v = f(grid[i]);
        if (v > best_value || (v == best_value && prefer(i, best))) {
            best = i;
            best_value = v;
        }
    }
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[best + 1 < grid.size() ? best + 1 : best];
    Maximum refined = golden_section_maximize(f, lo, hi, x_tol);
    if (refined.value < best_value) return {grid[best], best_value};
    return refined;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    auto out = linspace(std::log(lo), std::log(hi), n);
    for (auto& v : out) v = std::exp(v);
    if (n > 1) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

}  // namespace cars::numerics
