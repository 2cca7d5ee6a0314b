#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcdlab/spectrum.hpp"

namespace rcdlab {

inline constexpr int kHermiteMaxDegree = 8;

// Probabilists' Hermite polynomials with exact integer coefficients.
class HermiteBasis {
public:
    explicit HermiteBasis(int max_degree = kHermiteMaxDegree);

    int max_degree() const noexcept { return max_degree_; }
    /// Coefficients of H_n in increasing powers of x.
    const std::vector<std::int64_t>& coefficients(int n) const;

    double eval(int n, double x) const;
    double derivative(int n, double x) const;
    double second_derivative(int n, double x) const;

private:
    void check_degree(int n) const;

    int max_degree_;
    std::vector<std::vector<std::int64_t>> coeffs_;
};

double hermite_eval(int n, double x);
double hermite_derivative(int n, double x);
double hermite_second_derivative(int n, double x);

struct HermiteResidualReport {
    int degree = 0;
    double lambda1 = 0.0;
    double target = 0.0;  // n * lambda1
    double residual_norm = 0.0;
    double composed_norm = 0.0;
    double normalized_distance = 0.0;
    double nearest_eigenvalue = 0.0;
    std::size_t nearest_index = 0;
    double eigenvalue_distance = 0.0;
    /// ||r - H_n''(f)(Gamma(f) - lambda1)||_2 over interior nodes.
    double identity_gap = 0.0;
    bool holds = false;
};

/// r = Delta H_n(f) + n lambda1 H_n(f) with the discrete operator; checks that some computed
/// eigenvalue lies within normalized_distance + tolerance of n lambda1.
HermiteResidualReport hermite_residual_report(const SpectralDecomposition& d, int n,
                                              double tolerance = 1e-3);

struct PerturbedEigenvalueReport {
    double alpha = 0.0;
    double g_norm = 0.0;
    double nearest_eigenvalue = 0.0;
    double distance = 0.0;
    bool holds() const noexcept { return distance <= g_norm; }
};

/// For L = -Delta (discrete) and f normalized in L2(mu), writes L f = alpha f + g and
/// compares ||g||_2 with the distance from alpha to the full discrete spectrum.
PerturbedEigenvalueReport perturbed_eigenvalue_check(const OperatorDiscretization& op,
                                                     std::span<const double> f, double alpha);

}  // namespace rcdlab
