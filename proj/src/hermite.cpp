#include "rcdlab/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rcdlab/errors.hpp"

namespace rcdlab {

namespace {

constexpr double kDegenerateNorm = 1e-8;

const HermiteBasis& default_basis() {
    static const HermiteBasis basis;
    return basis;
}

}  // namespace

HermiteBasis::HermiteBasis(int max_degree) : max_degree_(max_degree) {
    if (max_degree < 1 || max_degree > kHermiteMaxDegree) {
        throw InvalidArgument("Hermite degree cap must lie in [1, " +
                              std::to_string(kHermiteMaxDegree) + "]");
    }
    coeffs_.push_back({1});
    coeffs_.push_back({0, 1});
    for (int n = 1; n < max_degree; ++n) {
        std::vector<std::int64_t> next(static_cast<std::size_t>(n) + 2, 0);
        const auto& cur = coeffs_[static_cast<std::size_t>(n)];
        const auto& prev = coeffs_[static_cast<std::size_t>(n) - 1];
        for (std::size_t k = 0; k < cur.size(); ++k) next[k + 1] += cur[k];
        for (std::size_t k = 0; k < prev.size(); ++k) next[k] -= n * prev[k];
        coeffs_.push_back(std::move(next));
    }
}

void HermiteBasis::check_degree(int n) const {
    if (n < 0 || n > max_degree_) {
        throw InvalidArgument("Hermite degree " + std::to_string(n) + " outside [0, " +
                              std::to_string(max_degree_) + "]");
    }
}

const std::vector<std::int64_t>& HermiteBasis::coefficients(int n) const {
    check_degree(n);
    return coeffs_[static_cast<std::size_t>(n)];
}

double HermiteBasis::eval(int n, double x) const {
    check_degree(n);
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int k = 1; k < n; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double HermiteBasis::derivative(int n, double x) const {
    check_degree(n);
    return n == 0 ? 0.0 : n * eval(n - 1, x);
}

double HermiteBasis::second_derivative(int n, double x) const {
    check_degree(n);
    return n < 2 ? 0.0 : static_cast<double>(n) * (n - 1) * eval(n - 2, x);
}

double hermite_eval(int n, double x) { return default_basis().eval(n, x); }
double hermite_derivative(int n, double x) { return default_basis().derivative(n, x); }
double hermite_second_derivative(int n, double x) { return default_basis().second_derivative(n, x); }

HermiteResidualReport hermite_residual_report(const SpectralDecomposition& d, int n, double tolerance) {
    if (d.count() < 2) throw InvalidArgument("Hermite residual needs the first nontrivial eigenpair");
    if (n < 1 || n > kHermiteMaxDegree) {
        throw InvalidArgument("Hermite residual degree must lie in [1, " +
                              std::to_string(kHermiteMaxDegree) + "]");
    }
    HermiteResidualReport r;
    r.degree = n;
    r.lambda1 = d.lambda1();
    r.target = n * r.lambda1;
    if (d.eigenvalues.back() < r.target) {
        throw InvalidArgument("computed spectrum tops out at " + std::to_string(d.eigenvalues.back()) +
                              " and does not bracket n lambda1 = " + std::to_string(r.target) +
                              "; request more eigenpairs");
    }
    const Measure1D& m = d.op.measure();
    const auto& f = d.f1().values;
    const std::size_t size = f.size();
    std::vector<double> hf(size);
    for (std::size_t i = 0; i < size; ++i) hf[i] = hermite_eval(n, f[i]);
    r.composed_norm = lp_norm(hf, 2.0, m);
    if (r.composed_norm < kDegenerateNorm) {
        throw DegenerateComposition("H_" + std::to_string(n) + "(f) has L2 norm " +
                                    std::to_string(r.composed_norm));
    }
    auto res = d.op.laplacian(hf);
    for (std::size_t i = 0; i < size; ++i) res[i] += r.target * hf[i];
    r.residual_norm = lp_norm(res, 2.0, m);
    r.normalized_distance = r.residual_norm / r.composed_norm;

    const auto gamma = d.op.carre_du_champ(f);
    double gap2 = 0.0;
    const auto w = m.weights();
    for (std::size_t i = 1; i + 1 < size; ++i) {
        const double identity = hermite_second_derivative(n, f[i]) * (gamma[i] - r.lambda1);
        gap2 += w[i] * (res[i] - identity) * (res[i] - identity);
    }
    r.identity_gap = std::sqrt(gap2);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d.count(); ++j) {
        const double dist = std::abs(d.eigenvalues[j] - r.target);
        if (dist < best) {
            best = dist;
            r.nearest_index = j;
        }
    }
    r.nearest_eigenvalue = d.eigenvalues[r.nearest_index];
    r.eigenvalue_distance = best;
    r.holds = best <= r.normalized_distance + tolerance;
    return r;
}

PerturbedEigenvalueReport perturbed_eigenvalue_check(const OperatorDiscretization& op,
                                                     std::span<const double> f, double alpha) {
    const Measure1D& m = op.measure();
    const double norm = lp_norm(f, 2.0, m);
    if (!(norm > 0.0)) throw InvalidArgument("test function must be nonzero");
    std::vector<double> u(f.begin(), f.end());
    for (double& v : u) v /= norm;
    auto g = op.laplacian(u);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -g[i] - alpha * u[i];

    PerturbedEigenvalueReport r;
    r.alpha = alpha;
    r.g_norm = lp_norm(g, 2.0, m);
    const auto spectrum = tridiagonal_eigenvalues(op.symmetric_form());
    r.distance = std::numeric_limits<double>::infinity();
    for (double l : spectrum) {
        const double dist = std::abs(l - alpha);
        if (dist < r.distance) {
            r.distance = dist;
            r.nearest_eigenvalue = l;
        }
    }
    return r;
}

}  // namespace rcdlab
