#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcdlab {

// Symmetric tridiagonal matrix: diag has n entries, off has n - 1 (off[i] couples i, i + 1).
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    std::size_t size() const noexcept { return diag.size(); }
    std::vector<double> multiply(std::span<const double> x) const;
};

/// All eigenvalues in ascending order by the implicit-shift QL iteration.
/// Throws NumericalFailure when an eigenvalue needs more than 60 sweeps.
std::vector<double> tridiagonal_eigenvalues(const SymTridiagonal& t);

/// Solves (T - shift I) x = b by Gaussian elimination with partial pivoting.
/// Tiny pivots are replaced by a floor so near-singular shifts stay usable.
std::vector<double> tridiagonal_shifted_solve(const SymTridiagonal& t, double shift,
                                              std::span<const double> b);

/// Unit eigenvectors for the given eigenvalues by inverse iteration, orthogonalized in order.
std::vector<std::vector<double>> tridiagonal_eigenvectors(const SymTridiagonal& t,
                                                          std::span<const double> eigenvalues);

}  // namespace rcdlab
