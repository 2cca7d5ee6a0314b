#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcdlab/measures.hpp"
#include "rcdlab/tridiagonal.hpp"

namespace rcdlab {

// Neumann Dirichlet form E(u, v) = sum_i w_{i+1/2} (u_{i+1} - u_i)(v_{i+1} - v_i) / h^2
// with half-cell masses w_{i+1/2} = h rho(x_{i+1/2}) and node masses m_i = weights().
class OperatorDiscretization {
public:
    const Measure1D& measure() const noexcept { return measure_; }
    const Grid1D& grid() const noexcept { return measure_.grid(); }
    std::size_t size() const noexcept { return measure_.size(); }
    std::span<const double> half_weights() const noexcept { return half_weights_; }
    std::span<const double> mass() const noexcept { return measure_.weights(); }

    double form(std::span<const double> u, std::span<const double> v) const;
    /// Stiffness times u, so that form(u, v) = <stiffness(u), v>.
    std::vector<double> stiffness(std::span<const double> u) const;
    /// Weighted Laplacian -M^{-1} K u at the nodes.
    std::vector<double> laplacian(std::span<const double> u) const;
    /// Discrete carre du champ: node average of the two adjacent half-cell energies,
    /// normalized so that its integral equals form(u, u).
    std::vector<double> carre_du_champ(std::span<const double> u) const;
    /// M^{-1/2} K M^{-1/2}, the symmetric standard form of the pencil (K, M).
    SymTridiagonal symmetric_form() const;

private:
    friend OperatorDiscretization assemble_dirichlet(const Measure1D& m);
    OperatorDiscretization(Measure1D m, std::vector<double> w)
        : measure_(std::move(m)), half_weights_(std::move(w)) {}

    Measure1D measure_;
    std::vector<double> half_weights_;
};

/// Throws ResolutionError when the density underflows at a node or midpoint.
OperatorDiscretization assemble_dirichlet(const Measure1D& m);

struct SpectralDecomposition {
    OperatorDiscretization op;
    std::vector<double> eigenvalues;
    std::vector<GridFunction> eigenfunctions;
    /// |lambda_j(n) - lambda_j(half grid)|; NaN when no half grid is available.
    std::vector<double> convergence;
    std::size_t half_grid_size = 0;
    double orthonormality_residual = 0.0;

    std::size_t count() const noexcept { return eigenvalues.size(); }
    double lambda1() const { return eigenvalues.at(1); }
    const GridFunction& f1() const { return eigenfunctions.at(1); }
};

/// Smallest k eigenpairs, L2(mu)-orthonormal, sign fixed by the rightmost node.
SpectralDecomposition eigenpairs(const OperatorDiscretization& op, std::size_t k,
                                 bool estimate_convergence = true);

/// Node count of the nested half-resolution grid used for convergence estimates.
std::size_t half_resolution_size(std::size_t n);

double lp_norm(std::span<const double> f, double p, const Measure1D& m);
double lp_norm(const GridFunction& f, double p, const Measure1D& m);

struct KeyLemmaReport {
    double p = 1.0;
    double lambda = 0.0;
    double lhs = 0.0;
    /// Explicit bound; empty on the p >= 2 branch where the constant is not quantified.
    std::optional<double> rhs;
    bool holds() const noexcept { return !rhs || lhs <= *rhs; }
};

/// Explicit right-hand side 4p (lambda - 1)^{1/2} lambda^{1/2} ((6p - 4)/(2 - p))^{lambda/2}.
double key_lemma_bound(double lambda, double p);
KeyLemmaReport key_lemma_report(const SpectralDecomposition& d, double p);

struct IntegrabilityReport {
    double p = 2.0;
    double f_norm = 0.0;
    std::optional<double> f_bound;  // needs p >= 2
    double grad_norm = 0.0;
    double grad_bound = 0.0;
};

IntegrabilityReport integrability_report(const SpectralDecomposition& d, double p);

struct BochnerReport {
    double pointwise_violation_max = 0.0;
    double integrated_gamma2 = 0.0;
    double lambda_sq = 0.0;
    double min_radicand = 0.0;
    bool discretization_warning = false;
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;
};

/// Gamma_2(f) = (f'')^2 + psi'' (f')^2 for the eigenfunction of the given index.
/// Pointwise checks run on nodes whose cumulative mass lies in [1e-9, 1 - 1e-9].
BochnerReport bochner_gamma2_report(const SpectralDecomposition& d, std::size_t index = 1);

/// Central first differences (one-sided second order at the ends).
std::vector<double> central_gradient(std::span<const double> f, double h);
/// Second central differences over h^2; end entries copy their neighbours.
std::vector<double> second_derivative(std::span<const double> f, double h);

/// Columnar text: a header line with the eigenvalues, then "node f0 ... f_{k-1}" rows.
std::string export_decomposition(const SpectralDecomposition& d);

struct ImportedDecomposition {
    std::vector<double> eigenvalues;
    std::vector<double> nodes;
    std::vector<std::vector<double>> eigenfunctions;
};

ImportedDecomposition import_decomposition(const std::string& text);

}  // namespace rcdlab
