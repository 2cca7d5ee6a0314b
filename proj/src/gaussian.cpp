#include "rcdlab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcdlab/errors.hpp"

namespace rcdlab::gaussian {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

double density(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double survival(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("gaussian::quantile: p must lie in (0, 1)");
    }
    if (p == 0.5) return 0.0;
    // Work in the lower half and reflect; the tail mass is then represented exactly.
    const bool upper = p > 0.5;
    const double q = upper ? 1.0 - p : p;

    // Bracket: sigma(-40) underflows, so [-40, 0] always contains the root.
    double lo = -40.0;
    double hi = 0.0;
    double x = -std::sqrt(-2.0 * std::log(q));  // crude tail start, refined below
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

    for (int iter = 0; iter < 200; ++iter) {
        const double f = cdf(x) - q;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double d = density(x);
        double next = (d > 0.0) ? x - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x))) {
            x = next;
            break;
        }
        x = next;
        if (hi - lo <= 1e-15) break;
    }
    return upper ? -x : x;
}

}  // namespace rcdlab::gaussian
