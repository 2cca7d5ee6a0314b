#include "rcdlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rcdlab/errors.hpp"

namespace rcdlab {

namespace {

constexpr double kUnderflowFloor = 1e-290;
constexpr double kWindowMass = 1e-9;
constexpr double kRadicandWarning = -1e-8;

void check_length(std::span<const double> u, std::size_t n, const char* what) {
    if (u.size() != n) {
        throw InvalidArgument(std::string(what) + " has " + std::to_string(u.size()) +
                              " values for a grid of " + std::to_string(n));
    }
}

// Potential at cell midpoints: cubic interpolation inside, quadratic in the end cells.
std::vector<double> midpoint_values(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<double> mid(n - 1);
    if (n == 3) {
        mid[0] = (3.0 * v[0] + 6.0 * v[1] - v[2]) / 8.0;
        mid[1] = (3.0 * v[2] + 6.0 * v[1] - v[0]) / 8.0;
        return mid;
    }
    for (std::size_t i = 1; i + 2 < n; ++i) {
        mid[i] = (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0;
    }
    mid[0] = (3.0 * v[0] + 6.0 * v[1] - v[2]) / 8.0;
    mid[n - 2] = (3.0 * v[n - 1] + 6.0 * v[n - 2] - v[n - 3]) / 8.0;
    return mid;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double OperatorDiscretization::form(std::span<const double> u, std::span<const double> v) const {
    const std::size_t n = size();
    check_length(u, n, "form argument");
    check_length(v, n, "form argument");
    const double h2 = grid().spacing() * grid().spacing();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        s += half_weights_[i] * ((u[i + 1] - u[i]) * (v[i + 1] - v[i]));
    }
    return s / h2;
}

std::vector<double> OperatorDiscretization::stiffness(std::span<const double> u) const {
    const std::size_t n = size();
    check_length(u, n, "stiffness argument");
    const double h2 = grid().spacing() * grid().spacing();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double flux = half_weights_[i] * (u[i + 1] - u[i]) / h2;
        out[i] -= flux;
        out[i + 1] += flux;
    }
    return out;
}

std::vector<double> OperatorDiscretization::laplacian(std::span<const double> u) const {
    auto out = stiffness(u);
    const auto m = mass();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] / m[i];
    return out;
}

std::vector<double> OperatorDiscretization::carre_du_champ(std::span<const double> u) const {
    const std::size_t n = size();
    check_length(u, n, "carre du champ argument");
    const double h2 = grid().spacing() * grid().spacing();
    const auto m = mass();
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double du = u[i + 1] - u[i];
        const double e = half_weights_[i] * du * du / h2;
        g[i] += e;
        g[i + 1] += e;
    }
    for (std::size_t i = 0; i < n; ++i) g[i] /= 2.0 * m[i];
    return g;
}

SymTridiagonal OperatorDiscretization::symmetric_form() const {
    const std::size_t n = size();
    const double h2 = grid().spacing() * grid().spacing();
    const auto m = mass();
    SymTridiagonal t;
    t.diag.assign(n, 0.0);
    t.off.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double w = half_weights_[i] / h2;
        t.diag[i] += w / m[i];
        t.diag[i + 1] += w / m[i + 1];
        t.off[i] = -w / std::sqrt(m[i] * m[i + 1]);
    }
    return t;
}

OperatorDiscretization assemble_dirichlet(const Measure1D& m) {
    const Grid1D& g = m.grid();
    const std::size_t n = g.size();
    const auto mass = m.weights();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(mass[i] > kUnderflowFloor)) {
            throw ResolutionError("density underflows at node " + std::to_string(i) +
                                  " (x = " + fmt(g.node(i)) + "); reduce the grid half-width");
        }
    }
    const auto mid = midpoint_values(m.potential().values());
    const double h = g.spacing();
    std::vector<double> w(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        w[i] = h * std::exp(-(mid[i] + m.log_normalization()));
        if (!(w[i] > kUnderflowFloor) || !std::isfinite(w[i])) {
            throw ResolutionError("density underflows at the midpoint of cell " + std::to_string(i) +
                                  "; reduce the grid half-width");
        }
    }
    return OperatorDiscretization(m, std::move(w));
}

std::size_t half_resolution_size(std::size_t n) {
    const std::size_t half = (n + 1) / 2;
    return half % 2 == 1 ? half : half + 1;
}

SpectralDecomposition eigenpairs(const OperatorDiscretization& op, std::size_t k,
                                 bool estimate_convergence) {
    const std::size_t n = op.size();
    if (k < 1 || k > n / 4) {
        throw InvalidArgument("eigenpair count must lie in [1, n/4] = [1, " + std::to_string(n / 4) +
                              "], got " + std::to_string(k));
    }
    const SymTridiagonal t = op.symmetric_form();
    auto all = tridiagonal_eigenvalues(t);
    std::vector<double> low(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    const auto vectors = tridiagonal_eigenvectors(t, low);

    const auto m = op.mass();
    SpectralDecomposition d{op, {}, {}, {}, 0, 0.0};
    d.eigenvalues.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = vectors[j][i] / std::sqrt(m[i]);
        if (f[n - 1] < 0.0) {
            for (double& v : f) v = -v;
        }
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm2 += m[i] * f[i] * f[i];
        // Rayleigh quotient on the grid function is more accurate than the QL value.
        d.eigenvalues[j] = op.form(f, f) / norm2;
        d.eigenfunctions.emplace_back(op.grid(), std::move(f));
    }

    double resid = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s += m[i] * d.eigenfunctions[a][i] * d.eigenfunctions[b][i];
            }
            resid = std::max(resid, std::abs(s - (a == b ? 1.0 : 0.0)));
        }
    }
    d.orthonormality_residual = resid;

    d.convergence.assign(k, std::numeric_limits<double>::quiet_NaN());
    if (estimate_convergence) {
        const std::size_t nh = half_resolution_size(n);
        d.half_grid_size = nh;
        if (nh >= 3 && nh < n && k <= nh / 4) {
            try {
                const Grid1D half = build_grid(op.grid().half_width(), nh);
                const auto coarse = eigenpairs(
                    assemble_dirichlet(normalize(op.measure().potential().resample(half))), k, false);
                for (std::size_t j = 0; j < k; ++j) {
                    d.convergence[j] = std::abs(d.eigenvalues[j] - coarse.eigenvalues[j]);
                }
            } catch (const ResolutionError&) {
                // Table potentials off the nested grid carry no estimate.
            }
        }
    }
    return d;
}

double lp_norm(std::span<const double> f, double p, const Measure1D& m) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw InvalidArgument("L^p norm needs finite p >= 1, got " + fmt(p));
    }
    check_length(f, m.size(), "L^p argument");
    const auto w = m.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::pow(std::abs(f[i]), p);
    return std::pow(s, 1.0 / p);
}

double lp_norm(const GridFunction& f, double p, const Measure1D& m) {
    return lp_norm(std::span<const double>(f.values), p, m);
}

double key_lemma_bound(double lambda, double p) {
    if (!(p >= 1.0 && p < 2.0)) {
        throw InvalidArgument("the explicit bound needs p in [1, 2), got " + fmt(p));
    }
    const double gap = std::max(lambda - 1.0, 0.0);
    return 4.0 * p * std::sqrt(gap) * std::sqrt(lambda) *
           std::pow((6.0 * p - 4.0) / (2.0 - p), lambda / 2.0);
}

KeyLemmaReport key_lemma_report(const SpectralDecomposition& d, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw InvalidArgument("key lemma exponent must be finite and >= 1, got " + fmt(p));
    }
    if (d.count() < 2) throw InvalidArgument("key lemma needs the first nontrivial eigenpair");
    KeyLemmaReport r;
    r.p = p;
    r.lambda = d.lambda1();
    auto gamma = d.op.carre_du_champ(d.f1().values);
    for (double& g : gamma) g -= r.lambda;
    r.lhs = lp_norm(gamma, p, d.op.measure());
    if (p < 2.0) r.rhs = key_lemma_bound(r.lambda, p);
    return r;
}

IntegrabilityReport integrability_report(const SpectralDecomposition& d, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw InvalidArgument("integrability exponent must be finite and >= 1, got " + fmt(p));
    }
    if (d.count() < 2) throw InvalidArgument("integrability needs the first nontrivial eigenpair");
    IntegrabilityReport r;
    r.p = p;
    const double lambda = d.lambda1();
    const Measure1D& m = d.op.measure();
    r.f_norm = lp_norm(d.f1(), p, m);
    if (p >= 2.0) r.f_bound = std::pow(p - 1.0, lambda / 2.0);
    auto grad = d.op.carre_du_champ(d.f1().values);
    for (double& g : grad) g = std::sqrt(g);
    r.grad_norm = lp_norm(grad, p, m);
    r.grad_bound = std::pow(4.0 * p - 2.0, lambda);
    return r;
}

std::vector<double> central_gradient(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw InvalidArgument("central gradient needs at least 3 values");
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return d;
}

std::vector<double> second_derivative(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw InvalidArgument("second derivative needs at least 3 values");
    std::vector<double> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    return d;
}

BochnerReport bochner_gamma2_report(const SpectralDecomposition& d, std::size_t index) {
    if (index >= d.count()) throw InvalidArgument("eigenfunction index out of range");
    const Measure1D& m = d.op.measure();
    const double h = m.grid().spacing();
    const auto& f = d.eigenfunctions[index].values;
    const auto f1 = central_gradient(f, h);
    const auto f2 = second_derivative(f, h);
    const auto psi2 = m.potential().second_difference();
    const std::size_t n = f.size();

    std::vector<double> gamma(n), gamma2(n);
    for (std::size_t i = 0; i < n; ++i) {
        gamma[i] = f1[i] * f1[i];
        gamma2[i] = f2[i] * f2[i] + psi2[i] * gamma[i];
    }
    const auto dgamma = central_gradient(gamma, h);

    BochnerReport r;
    r.lambda_sq = d.eigenvalues[index] * d.eigenvalues[index];
    r.integrated_gamma2 = m.integrate(gamma2);
    r.pointwise_violation_max = -std::numeric_limits<double>::infinity();
    r.min_radicand = std::numeric_limits<double>::infinity();
    const auto F = m.cdf();
    const auto S = m.survival();
    bool any = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (F[i] < kWindowMass || S[i] < kWindowMass) continue;
        if (!any) r.window_lo = i;
        r.window_hi = i;
        any = true;
        const double rad = gamma2[i] - gamma[i];
        r.min_radicand = std::min(r.min_radicand, rad);
        const double v = std::abs(dgamma[i]) - 2.0 * std::abs(f1[i]) * std::sqrt(std::max(rad, 0.0));
        r.pointwise_violation_max = std::max(r.pointwise_violation_max, v);
    }
    if (!any) throw ResolutionError("no grid node carries enough mass for the pointwise check");
    r.discretization_warning = r.min_radicand < kRadicandWarning;
    return r;
}

std::string export_decomposition(const SpectralDecomposition& d) {
    std::ostringstream os;
    os << "# eigenvalues";
    for (double l : d.eigenvalues) os << ' ' << fmt(l);
    os << '\n';
    os << "# node";
    for (std::size_t j = 0; j < d.count(); ++j) os << " f" << j;
    os << '\n';
    const Grid1D& g = d.op.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        os << fmt(g.node(i));
        for (const auto& f : d.eigenfunctions) os << ' ' << fmt(f[i]);
        os << '\n';
    }
    return os.str();
}

ImportedDecomposition import_decomposition(const std::string& text) {
    ImportedDecomposition out;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# eigenvalues", 0) == 0) {
            std::istringstream row(line.substr(13));
            double v = 0.0;
            while (row >> v) out.eigenvalues.push_back(v);
            out.eigenfunctions.assign(out.eigenvalues.size(), {});
            have_header = true;
            continue;
        }
        if (line[0] == '#') continue;
        if (!have_header) throw InvalidArgument("decomposition text lacks the eigenvalue header");
        std::istringstream row(line);
        double x = 0.0;
        if (!(row >> x)) throw InvalidArgument("malformed decomposition row: " + line);
        out.nodes.push_back(x);
        for (auto& f : out.eigenfunctions) {
            double v = 0.0;
            if (!(row >> v)) throw InvalidArgument("decomposition row has too few columns: " + line);
            f.push_back(v);
        }
    }
    if (!have_header) throw InvalidArgument("decomposition text lacks the eigenvalue header");
    return out;
}

}  // namespace rcdlab
