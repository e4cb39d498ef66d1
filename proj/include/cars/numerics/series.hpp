#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cars::numerics {

struct SeriesResult {
    double value = 0.0;
    int terms = 0;          // number of terms summed (k = 0 .. terms-1)
    double tail_bound = 0;  // bound on |sum_{k >= terms} term(k)|
};

class SeriesError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sums term(k) for k = 0, 1, ... until tail_bound(k) < tol, where tail_bound(k)
/// must bound |sum_{j >= k} term(j)|. Throws when the bound is not met by k_max.
template <class Term, class TailBound>
SeriesResult sum_series(Term&& term, TailBound&& tail_bound, double tol, int k_max = 500) {
    if (!(tol > 0.0)) throw std::invalid_argument("sum_series: tol must be positive");
    double sum = 0.0;
    double carry = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        const double bound = tail_bound(k);
        if (bound < tol) return {sum + carry, k, bound};
        const double v = term(k);
        const double t = sum + v;
        carry += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    throw SeriesError("sum_series: tail bound not below " + std::to_string(tol) + " within " +
                      std::to_string(k_max) + " terms");
}

/// Tail of a Poisson(lambda) mass function from index k on; valid for k + 1 > lambda.
inline double poisson_tail_bound(double lambda, int k) {
    if (lambda <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (k + 1 <= lambda) return 1.0;
    const double log_pk = -lambda + k * std::log(lambda) - std::lgamma(k + 1.0);
    return std::exp(log_pk) / (1.0 - lambda / (k + 1.0));
}

}  // namespace cars::numerics
