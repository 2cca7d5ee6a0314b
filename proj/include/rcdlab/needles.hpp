#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcdlab/measures.hpp"
#include "rcdlab/spectrum.hpp"
#include "rcdlab/transport.hpp"

namespace rcdlab {

inline constexpr std::size_t kMaxProductCells = 10'000'000;
inline constexpr std::size_t kMaxFactors = 3;

// Tensor product of 1D measures under the Euclidean product metric. Weights are
// products of factor node weights and are never stored.
class ProductMeasure {
public:
    explicit ProductMeasure(std::vector<Measure1D> factors);

    std::size_t dimension() const noexcept { return factors_.size(); }
    const Measure1D& factor(std::size_t axis) const { return factors_.at(axis); }
    const std::vector<Measure1D>& factors() const noexcept { return factors_; }
    std::size_t cell_count() const noexcept;

    double weight(const std::vector<std::size_t>& index) const;
    /// Sum of all tensor weights.
    double total_mass() const;
    /// Marginal node weights along one axis, summed over the tensor grid.
    std::vector<double> marginal_weights(std::size_t axis) const;
    /// Tensor quadrature of the box prod_k [lo_k, hi_k] (node membership).
    double box_mass(const std::vector<std::pair<double, double>>& box) const;
    double spectral_gap() const;

private:
    std::vector<Measure1D> factors_;
};

/// Builds the product, halving the finest factor (nested subsampling) until the tensor
/// grid fits in max_cells. Throws InvalidArgument for 0 or more than 3 factors.
ProductMeasure product_measure(std::vector<Measure1D> factors, std::size_t max_cells = kMaxProductCells);

// Axis-parallel needles: every line along `axis` carries the axis factor as its
// conditional measure, and the quotient is the product of the remaining factors.
struct NeedleFamily {
    std::size_t axis = 0;
    Measure1D needle;
    std::vector<Measure1D> quotient;
    std::size_t multiplicity = 0;  // number of quotient nodes
    GridFunction f;
    double needle_mean_f = 0.0;    // integral of f on each needle
    double c_q = 0.0;              // L2(m_q) minimizer of (f - g - c)^2
    bool needle_convex = false;    // psi'' >= 1 on the needle
    std::size_t zero_cells = 0;    // cells on which f vanishes identically
};

/// Throws InvalidArgument when f is not centred under the axis factor (1e-8).
NeedleFamily disintegrate_axis(const ProductMeasure& p, std::size_t axis, const GridFunction& f);

struct DisintegrationCheck {
    double mu_mass = 0.0;
    double needle_mass = 0.0;  // integral over the quotient of m_q(A)
    double defect = 0.0;
};

DisintegrationCheck disintegration_check(const ProductMeasure& p, const NeedleFamily& nf,
                                         const std::vector<std::pair<double, double>>& box);

struct GuidingReport {
    double score_g = 0.0;
    double max_competitor_score = 0.0;
    std::string best_competitor;
    std::size_t competitors = 0;
    bool f_monotone = true;  // false raises a warning; the check still runs
    bool holds = false;      // score_g >= max_competitor_score - 1e-8
};

/// g = signed axis coordinate against random 1-Lipschitz competitors (axis-only slopes,
/// separable sums along a random direction, maxima of two such) and a fixed family of
/// tanh profiles and clipped ramps.
GuidingReport guiding_function_check(const ProductMeasure& p, std::size_t axis, const GridFunction& f_axis,
                                     std::size_t trials, std::uint64_t seed);

struct NeedleEstimates {
    double epsilon = 0.0;
    double delta = 0.0;
    double int_f2 = 0.0;
    double int_grad2 = 0.0;
    double f2_lower = 0.0;    // 1 - (48 sqrt(eps) + 2 eps) / delta
    double f2_upper = 0.0;    // 1 + 48 sqrt(eps) / delta
    double grad_upper = 0.0;  // int_f2 + 2 eps / delta
    std::size_t multiplicity = 0;
    double passing_mass = 0.0;
    bool sandwich_holds = false;
    bool gradient_holds = false;
    bool mass_holds = false;
};

/// Per-needle L2 and energy bounds; all needles coincide, so one row carries the
/// multiplicity. Throws InvalidArgument unless delta lies in (0, 1).
NeedleEstimates needle_estimates_report(const NeedleFamily& nf, const SpectralDecomposition& d, double delta);

struct FgH1Report {
    double epsilon = 0.0;
    double theta = 0.0;
    double l2_dev = 0.0;          // int (f - g)^2 dmu
    double h1_dev = 0.0;          // int |grad f - grad g|^2 dmu
    double per_needle_dev = 0.0;  // int (f - g - c_q)^2 dm_q
    double g_mean = 0.0;          // int g dm_q
    double c_q = 0.0;
    double c_q_mean_dev = 0.0;    // |int g dm_q + c_q|
    double w1_g = 0.0;
    double tv_g = 0.0;
    double l2_ratio = 0.0;        // l2_dev / eps^(1/10 - theta)
    double h1_ratio = 0.0;        // h1_dev / eps^(1/20 - theta)
    double w1_ratio = 0.0;        // w1_g / eps^(1/20 - theta)
};

FgH1Report fg_h1_report(const NeedleFamily& nf, const SpectralDecomposition& d, double theta);

}  // namespace rcdlab
