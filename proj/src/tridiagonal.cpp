#include "rcdlab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rcdlab/errors.hpp"

namespace rcdlab {

namespace {

constexpr int kMaxSweeps = 60;
constexpr int kInverseIterations = 3;

double inf_norm(const SymTridiagonal& t) {
    const std::size_t n = t.size();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::abs(t.diag[i]);
        if (i > 0) row += std::abs(t.off[i - 1]);
        if (i + 1 < n) row += std::abs(t.off[i]);
        best = std::max(best, row);
    }
    return best;
}

void check_shape(const SymTridiagonal& t) {
    if (t.diag.empty() || t.off.size() + 1 != t.diag.size()) {
        throw InvalidArgument("tridiagonal matrix needs n diagonal and n - 1 off-diagonal entries");
    }
}

}  // namespace

std::vector<double> SymTridiagonal::multiply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * x[i];
        if (i > 0) v += off[i - 1] * x[i - 1];
        if (i + 1 < n) v += off[i] * x[i + 1];
        y[i] = v;
    }
    return y;
}

std::vector<double> tridiagonal_eigenvalues(const SymTridiagonal& t) {
    check_shape(t);
    const int n = static_cast<int>(t.size());
    std::vector<double> d = t.diag;
    std::vector<double> e(t.size(), 0.0);
    std::copy(t.off.begin(), t.off.end(), e.begin());
    const double eps = std::numeric_limits<double>::epsilon();

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (iter++ == kMaxSweeps) {
                throw NumericalFailure("tridiagonal QL did not converge for eigenvalue index " +
                                       std::to_string(l) + " after " + std::to_string(kMaxSweeps) +
                                       " sweeps (residual coupling " + std::to_string(e[l]) + ")");
            }
            // Wilkinson-type shift from the leading 2x2 block, then a chase of plane rotations.
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::sqrt(g * g + 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            int i = m - 1;
            for (; i >= l; --i) {
                const double f = s * e[i];
                const double b = c * e[i];
                r = std::sqrt(f * f + g * g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if (r == 0.0 && i >= l) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

std::vector<double> tridiagonal_shifted_solve(const SymTridiagonal& t, double shift,
                                              std::span<const double> b) {
    check_shape(t);
    const std::size_t n = t.size();
    if (b.size() != n) throw InvalidArgument("right-hand side length does not match the matrix");
    const double floor = std::numeric_limits<double>::epsilon() * std::max(inf_norm(t), 1.0);

    // Row i of U holds u0 (diagonal), u1, u2 (two superdiagonals after pivoting).
    std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0), rhs(b.begin(), b.end());

    // Current working row: (a, bsup, csup) for columns i, i+1, i+2.
    double a = t.diag[0] - shift;
    double bs = n > 1 ? t.off[0] : 0.0;
    double cs = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double sub = t.off[i];
        const double next_diag = t.diag[i + 1] - shift;
        const double next_sup = i + 2 < n ? t.off[i + 1] : 0.0;
        if (std::abs(a) >= std::abs(sub)) {
            double piv = a;
            if (std::abs(piv) < floor) piv = std::copysign(floor, piv == 0.0 ? 1.0 : piv);
            const double l = sub / piv;
            u0[i] = piv;
            u1[i] = bs;
            u2[i] = cs;
            rhs[i + 1] -= l * rhs[i];
            a = next_diag - l * bs;
            bs = next_sup - l * cs;
            cs = 0.0;
        } else {
            // Swap the working row with row i + 1 before eliminating.
            const double l = a / sub;
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            std::swap(rhs[i], rhs[i + 1]);
            rhs[i + 1] -= l * rhs[i];
            const double na = bs - l * next_diag;
            const double nb = cs - l * next_sup;
            a = na;
            bs = nb;
            cs = 0.0;
        }
    }
    if (std::abs(a) < floor) a = std::copysign(floor, a == 0.0 ? 1.0 : a);
    u0[n - 1] = a;

    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double v = rhs[k];
        if (k + 1 < n) v -= u1[k] * x[k + 1];
        if (k + 2 < n) v -= u2[k] * x[k + 2];
        x[k] = v / u0[k];
    }
    return x;
}

std::vector<std::vector<double>> tridiagonal_eigenvectors(const SymTridiagonal& t,
                                                          std::span<const double> eigenvalues) {
    check_shape(t);
    const std::size_t n = t.size();
    std::vector<std::vector<double>> out;
    out.reserve(eigenvalues.size());
    for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
        // Deterministic start vector with components along every eigenvector in practice.
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3 * static_cast<double>(j));
        }
        for (int it = 0; it < kInverseIterations; ++it) {
            x = tridiagonal_shifted_solve(t, eigenvalues[j], x);
            for (const auto& prev : out) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += prev[i] * x[i];
                for (std::size_t i = 0; i < n; ++i) x[i] -= dot * prev[i];
            }
            double norm = 0.0;
            for (double v : x) norm += v * v;
            norm = std::sqrt(norm);
            if (!(norm > 0.0) || !std::isfinite(norm)) {
                throw NumericalFailure("inverse iteration collapsed for eigenvalue index " +
                                       std::to_string(j));
            }
            for (double& v : x) v /= norm;
        }
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace rcdlab
