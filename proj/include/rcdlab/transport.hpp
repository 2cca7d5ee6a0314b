#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rcdlab/measures.hpp"
#include "rcdlab/spectrum.hpp"

namespace rcdlab {

// Probability distribution on the line with a piecewise-linear CDF through the knots
// (y_k, F_k). Repeated y values encode atoms (jumps); flat stretches are allowed.
class Distribution1D {
public:
    Distribution1D(std::vector<double> y, std::vector<double> F);

    static Distribution1D from_measure(const Measure1D& m);
    /// Standard Gaussian with knots on a uniform grid; the tail mass sits at the two ends.
    static Distribution1D standard_gaussian(double half_width, std::size_t n_points);
    /// Discrete distribution with the given atoms (weights are normalized).
    static Distribution1D from_atoms(std::vector<double> x, std::vector<double> w);

    std::span<const double> knots() const noexcept { return y_; }
    std::span<const double> cdf_values() const noexcept { return F_; }
    double support_min() const noexcept { return y_.front(); }
    double support_max() const noexcept { return y_.back(); }

    /// Right-continuous CDF.
    double cdf(double y) const;
    /// Left-continuous quantile on [0, 1].
    double quantile(double p) const;
    double mean() const;

private:
    std::vector<double> y_;
    std::vector<double> F_;
};

/// Standard Gaussian on [-H, H] with H = ceil(reach) + 1 and knot spacing at most `spacing`.
Distribution1D gaussian_reference(double reach, double spacing);

struct DistanceReport {
    double w1 = 0.0;
    double w2 = 0.0;
    double tv = 0.0;
};

/// Exact W1, W2 and TV between piecewise-linear CDFs (integrals over the union of knots).
DistanceReport distances(const Distribution1D& a, const Distribution1D& b);
DistanceReport wasserstein_tv(const Measure1D& a, const Measure1D& b);

/// Law of f under m; the mass of each grid segment is spread uniformly over [f_i, f_{i+1}].
Distribution1D pushforward(const Measure1D& m, const GridFunction& f);

struct TransportMap1D {
    Grid1D grid;                // source nodes
    std::vector<double> values; // T at the source nodes
    double max_slope = 0.0;
    double min_slope = 0.0;
    double slope_at = 0.0;      // source node where the max slope occurs
    double max_cdf_defect = 0.0;
    std::size_t window_lo = 0;  // slopes use cells inside [window_lo, window_hi]
    std::size_t window_hi = 0;
};

/// T = Q_dst o F_src at the source nodes. The target CDF is inverted with cubic Hermite
/// interpolation (F' = rho) so finite-difference slopes are not dominated by the
/// piecewise-linear quantile's kinks. Throws ResolutionError when the target is too narrow.
TransportMap1D monotone_map(const Measure1D& src, const Measure1D& dst);

struct SteinReport {
    double lambda = 0.0;
    double gamma_deficit = 0.0;
    double explicit_bound = 0.0;
    double w1_actual = 0.0;
    double tv_actual = 0.0;
    bool chain_holds = false;  // w1 <= 4 gamma_deficit + tolerance
    bool bound_holds = false;  // w1 <= explicit_bound + tolerance
};

double stein_explicit_bound(double lambda);
/// Throws InvalidArgument when f1 is not centered and L2(mu)-normalized within 1e-6.
SteinReport stein_report(const SpectralDecomposition& d, double tolerance = 1e-3);

}  // namespace rcdlab
