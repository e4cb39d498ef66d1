#pragma once

// Adaptive Gauss-Kronrod quadrature on intervals and rectangles.
//
// Each cell is integrated with the 15-point Kronrod rule and its embedded
// 7-point Gauss rule (tensor products in 2D). The cell error is |K - G| rescaled
// as in QUADPACK: resasc * min(1, (200 |K - G| / resasc)^1.5), floored at 50 eps * resabs.
// Refinement is global: the cell with the largest error is split first.
// Ties are broken by creation order and the final sum runs over cells in
// creation order, so results are bit-reproducible.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace cars::numerics {

struct Interval {
    double lo;
    double hi;
};

struct Rect {
    double x_lo;
    double x_hi;
    double y_lo;
    double y_hi;

    static Rect square(double half_width) { return {-half_width, half_width, -half_width, half_width}; }
};

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_depth = 30;
    std::size_t max_evaluations = 50'000'000;

    void validate() const {
        if (!(abs_tol > 0.0) && !(rel_tol > 0.0))
            throw std::invalid_argument("QuadratureSpec: abs_tol or rel_tol must be positive");
        if (abs_tol < 0.0 || rel_tol < 0.0) throw std::invalid_argument("QuadratureSpec: negative tolerance");
        if (max_depth < 1) throw std::invalid_argument("QuadratureSpec: max_depth must be >= 1");
    }
    [[nodiscard]] double target(double magnitude) const { return std::max(abs_tol, rel_tol * magnitude); }
};

template <class T>
struct QuadratureResult {
    T value{};
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

/// Raised when the requested tolerance is not met; carries what was achieved.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved_error, double target)
        : std::runtime_error(what + " (achieved error " + sci(achieved_error) + ", target " + sci(target) + ")"),
          achieved_error_(achieved_error),
          target_(target) {}
    [[nodiscard]] double achieved_error() const noexcept { return achieved_error_; }
    [[nodiscard]] double target() const noexcept { return target_; }

private:
    static std::string sci(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return buf;
    }
    double achieved_error_;
    double target_;
};

namespace detail {

struct GaussKronrod15 {
    std::array<double, 15> nodes;
    std::array<double, 15> kronrod;
    std::array<double, 15> gauss;  // zero on Kronrod-only nodes
};

inline const GaussKronrod15& gk15() {
    static const GaussKronrod15 rule = [] {
        constexpr std::array<double, 8> xgk = {
            0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
        constexpr std::array<double, 8> wgk = {
            0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
        constexpr std::array<double, 4> wg = {
            0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
            0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
        GaussKronrod15 r{};
        for (int i = 0; i < 7; ++i) {
            const double g = (i % 2 == 1) ? wg[static_cast<std::size_t>(i / 2)] : 0.0;
            r.nodes[i] = -xgk[i];
            r.nodes[14 - i] = xgk[i];
            r.kronrod[i] = r.kronrod[14 - i] = wgk[i];
            r.gauss[i] = r.gauss[14 - i] = g;
        }
        r.nodes[7] = 0.0;
        r.kronrod[7] = wgk[7];
        r.gauss[7] = wg[3];
        return r;
    }();
    return rule;
}

// Neumaier-compensated accumulation, usable for real and complex values.
template <class T>
struct CompensatedSum {
    T sum{};
    T carry{};
    void add(T v) {
        if constexpr (std::is_floating_point_v<T>) {
            const T t = sum + v;
            carry += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
            sum = t;
        } else {
            const auto re = add_part(sum.real(), carry_re, v.real());
            const auto im = add_part(sum.imag(), carry_im, v.imag());
            sum = T(re, im);
        }
    }
    [[nodiscard]] T total() const {
        if constexpr (std::is_floating_point_v<T>) return sum + carry;
        else return sum + T(carry_re, carry_im);
    }

private:
    double carry_re = 0.0;
    double carry_im = 0.0;
    static double add_part(double s, double& c, double v) {
        const double t = s + v;
        c += (std::abs(s) >= std::abs(v)) ? (s - t) + v : (v - t) + s;
        return t;
    }
};

template <class T>
struct Cell {
    double bounds[4];  // x_lo, x_hi, y_lo, y_hi (1D uses the first two)
    T value;
    double error;
    int depth;
    std::size_t id;
};

template <class T>
struct CellOrder {
    const std::vector<Cell<T>>* cells;
    bool operator()(std::size_t a, std::size_t b) const {
        const auto& ca = (*cells)[a];
        const auto& cb = (*cells)[b];
        if (ca.error != cb.error) return ca.error < cb.error;
        return ca.id > cb.id;
    }
};

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

// QUADPACK's empirical rescaling of the Kronrod-Gauss difference.
inline double kronrod_error(double diff, double resabs, double resasc) {
    double err = diff;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
    if (resabs > std::numeric_limits<double>::min() / (50.0 * std::numeric_limits<double>::epsilon()))
        err = std::max(err, floor);
    return err;
}

// Shared global-adaptive driver. `rule(bounds, value, error)` integrates one cell,
// `split(bounds)` returns its children.
template <class T, class Rule, class Split>
QuadratureResult<T> adaptive(const double (&root)[4], const QuadratureSpec& spec, std::size_t evals_per_cell,
                             Rule&& rule, Split&& split, const char* name) {
    spec.validate();
    std::vector<Cell<T>> cells;
    std::vector<bool> active;
    cells.reserve(256);
    Cell<T> first{{root[0], root[1], root[2], root[3]}, T{}, 0.0, 0, 0};
    rule(first.bounds, first.value, first.error);
    cells.push_back(first);
    active.push_back(true);
    std::size_t evals = evals_per_cell;

    std::priority_queue<std::size_t, std::vector<std::size_t>, CellOrder<T>> queue(CellOrder<T>{&cells});
    queue.push(0);

    auto totals = [&]() {
        CompensatedSum<T> v;
        double e = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!active[i]) continue;
            v.add(cells[i].value);
            e += cells[i].error;
        }
        return std::pair<T, double>{v.total(), e};
    };

    T running_value = first.value;
    double running_error = first.error;
    while (true) {
        if (running_error <= spec.target(magnitude(running_value))) {
            auto [v, e] = totals();
            running_value = v;
            running_error = e;
            if (e <= spec.target(magnitude(v))) return {v, e, evals};
        }
        if (queue.empty()) {
            auto [v, e] = totals();
            throw QuadratureError(std::string(name) + ": maximum depth reached", e, spec.target(magnitude(v)));
        }
        const std::size_t worst = queue.top();
        queue.pop();
        if (cells[worst].depth >= spec.max_depth) continue;  // frozen leaf
        if (evals + 4 * evals_per_cell > spec.max_evaluations) {
            auto [v, e] = totals();
            throw QuadratureError(std::string(name) + ": evaluation budget exhausted", e, spec.target(magnitude(v)));
        }
        active[worst] = false;
        running_value -= cells[worst].value;
        running_error -= cells[worst].error;
        const Cell<T> parent = cells[worst];
        for (const auto& b : split(parent.bounds)) {
            Cell<T> child{{b[0], b[1], b[2], b[3]}, T{}, 0.0, parent.depth + 1, cells.size()};
            rule(child.bounds, child.value, child.error);
            evals += evals_per_cell;
            running_value += child.value;
            running_error += child.error;
            cells.push_back(child);
            active.push_back(true);
            queue.push(child.id);
        }
    }
}

}  // namespace detail

/// Adaptive 1D integration of a real or complex valued function.
template <class F>
auto integrate_1d(F&& f, Interval domain, const QuadratureSpec& spec = {}) {
    using T = std::decay_t<decltype(f(0.0))>;
    const auto& gk = detail::gk15();
    auto rule = [&](const double (&b)[4], T& value, double& error) {
        const double half = 0.5 * (b[1] - b[0]);
        const double mid = 0.5 * (b[1] + b[0]);
        std::array<T, 15> fx;
        T k{};
        T g{};
        double resabs = 0.0;
        for (std::size_t i = 0; i < 15; ++i) {
            fx[i] = f(mid + half * gk.nodes[i]);
            k += gk.kronrod[i] * fx[i];
            g += gk.gauss[i] * fx[i];
            resabs += gk.kronrod[i] * std::abs(fx[i]);
        }
        const T mean = 0.5 * k;
        double resasc = 0.0;
        for (std::size_t i = 0; i < 15; ++i) resasc += gk.kronrod[i] * std::abs(fx[i] - mean);
        const double scale = std::abs(half);
        value = half * k;
        error = detail::kronrod_error(scale * std::abs(k - g), scale * resabs, scale * resasc);
    };
    auto split = [](const double (&b)[4]) {
        const double m = 0.5 * (b[0] + b[1]);
        return std::array<std::array<double, 4>, 2>{{{b[0], m, 0.0, 0.0}, {m, b[1], 0.0, 0.0}}};
    };
    const double root[4] = {domain.lo, domain.hi, 0.0, 0.0};
    return detail::adaptive<T>(root, spec, 15, rule, split, "integrate_1d");
}

/// Adaptive 2D integration over a rectangle (tensor Gauss-Kronrod cells, 2x2 splits).
template <class F>
QuadratureResult<double> integrate_2d(F&& f, Rect domain, const QuadratureSpec& spec = {}) {
    const auto& gk = detail::gk15();
    auto rule = [&](const double (&b)[4], double& value, double& error) {
        const double hx = 0.5 * (b[1] - b[0]);
        const double mx = 0.5 * (b[1] + b[0]);
        const double hy = 0.5 * (b[3] - b[2]);
        const double my = 0.5 * (b[3] + b[2]);
        std::array<double, 225> fx;
        double k = 0.0;
        double g = 0.0;
        double resabs = 0.0;
        for (std::size_t j = 0; j < 15; ++j) {
            const double y = my + hy * gk.nodes[j];
            double kr = 0.0;
            double gr = 0.0;
            double ar = 0.0;
            for (std::size_t i = 0; i < 15; ++i) {
                const double v = f(mx + hx * gk.nodes[i], y);
                fx[15 * j + i] = v;
                kr += gk.kronrod[i] * v;
                gr += gk.gauss[i] * v;
                ar += gk.kronrod[i] * std::abs(v);
            }
            k += gk.kronrod[j] * kr;
            g += gk.gauss[j] * gr;
            resabs += gk.kronrod[j] * ar;
        }
        const double mean = 0.25 * k;
        double resasc = 0.0;
        for (std::size_t j = 0; j < 15; ++j) {
            double ar = 0.0;
            for (std::size_t i = 0; i < 15; ++i) ar += gk.kronrod[i] * std::abs(fx[15 * j + i] - mean);
            resasc += gk.kronrod[j] * ar;
        }
        const double area = std::abs(hx * hy);
        value = hx * hy * k;
        error = detail::kronrod_error(area * std::abs(k - g), area * resabs, area * resasc);
    };
    auto split = [](const double (&b)[4]) {
        const double mx = 0.5 * (b[0] + b[1]);
        const double my = 0.5 * (b[2] + b[3]);
        return std::array<std::array<double, 4>, 4>{{{b[0], mx, b[2], my},
                                                     {mx, b[1], b[2], my},
                                                     {b[0], mx, my, b[3]},
                                                     {mx, b[1], my, b[3]}}};
    };
    const double root[4] = {domain.x_lo, domain.x_hi, domain.y_lo, domain.y_hi};
    return detail::adaptive<double>(root, spec, 225, rule, split, "integrate_2d");
}

}  // namespace cars::numerics
