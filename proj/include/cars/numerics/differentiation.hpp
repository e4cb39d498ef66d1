#pragma once

namespace cars::numerics {

enum class Stencil { central2, forward2 };

/// Second-order finite difference; forward2 only samples x, x+h, x+2h.
template <class F>
auto finite_difference(F&& f, double x, double h, Stencil stencil = Stencil::central2) {
    if (stencil == Stencil::central2) return (f(x + h) - f(x - h)) / (2.0 * h);
    return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
}

}  // namespace cars::numerics
