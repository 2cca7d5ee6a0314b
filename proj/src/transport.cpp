#include "rcdlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "rcdlab/errors.hpp"
#include "rcdlab/gaussian.hpp"

namespace rcdlab {

namespace {

constexpr double kWindowMass = 1e-9;
constexpr double kNormalizationTol = 1e-6;
constexpr int kBisectionSteps = 80;

// Value at t of the linear piece of a distribution's CDF that covers the open
// interval around `mid` (mid strictly inside a union interval).
double piece_value(const std::vector<double>& y, const std::vector<double>& F, double mid, double t) {
    if (mid < y.front()) return 0.0;
    if (mid >= y.back()) return 1.0;
    const auto k = static_cast<std::size_t>(std::upper_bound(y.begin(), y.end(), mid) - y.begin()) - 1;
    return F[k] + (F[k + 1] - F[k]) * (t - y[k]) / (y[k + 1] - y[k]);
}

double left_limit(const std::vector<double>& y, const std::vector<double>& F, double u) {
    if (u <= y.front()) return 0.0;
    const auto it = std::lower_bound(y.begin(), y.end(), u);
    if (it == y.end()) return 1.0;
    const auto j = static_cast<std::size_t>(it - y.begin());
    return F[j - 1] + (F[j] - F[j - 1]) * (u - y[j - 1]) / (y[j] - y[j - 1]);
}

double right_limit(const std::vector<double>& y, const std::vector<double>& F, double u) {
    if (u < y.front()) return 0.0;
    if (u >= y.back()) return 1.0;
    const auto k = static_cast<std::size_t>(std::upper_bound(y.begin(), y.end(), u) - y.begin()) - 1;
    return F[k] + (F[k + 1] - F[k]) * (u - y[k]) / (y[k + 1] - y[k]);
}

// Linear piece of the quantile covering the open p-interval around pm.
double quantile_piece(const std::vector<double>& y, const std::vector<double>& F, double pm, double p) {
    const auto j = static_cast<std::size_t>(std::lower_bound(F.begin(), F.end(), pm) - F.begin());
    const std::size_t k = std::clamp<std::size_t>(j, 1, F.size() - 1);
    const double dF = F[k] - F[k - 1];
    if (!(dF > 0.0)) return y[k];
    return y[k - 1] + (p - F[k - 1]) / dF * (y[k] - y[k - 1]);
}

double linear_abs_integral(double d0, double d1, double width) {
    if ((d0 >= 0.0) == (d1 >= 0.0)) return 0.5 * (std::abs(d0) + std::abs(d1)) * width;
    const double a0 = std::abs(d0);
    const double a1 = std::abs(d1);
    return 0.5 * (a0 * a0 + a1 * a1) / (a0 + a1) * width;
}

double hermite_cdf(double f0, double f1, double d0, double d1, double h, double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * h * d0 +
           (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * h * d1;
}

// Solves the cubic Hermite model of a monotone cumulative on one cell for `target`,
// where the model runs from v0 to v1 (v0 < target <= v1 or the reverse).
double invert_cell(double v0, double v1, double d0, double d1, double h, double target) {
    double lo = 0.0;
    double hi = 1.0;
    const bool increasing = v1 > v0;
    for (int it = 0; it < kBisectionSteps; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = hermite_cdf(v0, v1, d0, d1, h, mid);
        if ((v < target) == increasing) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Inverse of the target measure's cumulative: lower half through F, upper half through S.
double inverse_cdf(const Measure1D& m, double p, double s) {
    const Grid1D& g = m.grid();
    const auto F = m.cdf();
    const auto S = m.survival();
    const auto rho = m.density();
    const double h = g.spacing();
    const std::size_t n = g.size();
    if (p <= 0.5) {
        if (p <= 0.0) return g.node(0);
        const auto j = static_cast<std::size_t>(std::lower_bound(F.begin(), F.end(), p) - F.begin());
        const std::size_t k = std::clamp<std::size_t>(j, 1, n - 1) - 1;
        const double t = invert_cell(F[k], F[k + 1], rho[k], rho[k + 1], h, p);
        return g.node(k) + t * h;
    }
    if (s <= 0.0) return g.node(n - 1);
    // First index with S_j <= s.
    const auto it = std::lower_bound(S.begin(), S.end(), s, [](double a, double v) { return a > v; });
    const auto j = static_cast<std::size_t>(it - S.begin());
    const std::size_t k = std::clamp<std::size_t>(j, 1, n - 1) - 1;
    const double t = invert_cell(S[k], S[k + 1], -rho[k], -rho[k + 1], h, s);
    return g.node(k) + t * h;
}

}  // namespace

Distribution1D::Distribution1D(std::vector<double> y, std::vector<double> F) : y_(std::move(y)), F_(std::move(F)) {
    if (y_.size() != F_.size() || y_.size() < 2) {
        throw InvalidArgument("distribution needs at least two knots with matching CDF values");
    }
    for (std::size_t k = 0; k < y_.size(); ++k) {
        if (!std::isfinite(y_[k]) || !std::isfinite(F_[k])) throw InvalidArgument("distribution knot is not finite");
        if (k > 0 && (y_[k] < y_[k - 1] || F_[k] < F_[k - 1])) {
            throw InvalidArgument("distribution knots and CDF values must be nondecreasing");
        }
    }
    if (std::abs(F_.front()) > 1e-9 || std::abs(F_.back() - 1.0) > 1e-9) {
        throw InvalidArgument("distribution CDF must run from 0 to 1");
    }
    F_.front() = 0.0;
    F_.back() = 1.0;
    for (double& v : F_) v = std::clamp(v, 0.0, 1.0);
}

Distribution1D Distribution1D::from_measure(const Measure1D& m) {
    const auto x = m.grid().nodes();
    const auto F = m.cdf();
    return Distribution1D(std::vector<double>(x.begin(), x.end()), std::vector<double>(F.begin(), F.end()));
}

Distribution1D Distribution1D::standard_gaussian(double half_width, std::size_t n_points) {
    const Grid1D g = build_grid(half_width, n_points);
    std::vector<double> y;
    std::vector<double> F;
    y.reserve(n_points + 2);
    F.reserve(n_points + 2);
    y.push_back(g.node(0));
    F.push_back(0.0);
    for (std::size_t i = 0; i < n_points; ++i) {
        y.push_back(g.node(i));
        F.push_back(g.node(i) <= 0.0 ? gaussian::cdf(g.node(i)) : 1.0 - gaussian::survival(g.node(i)));
    }
    y.push_back(g.node(n_points - 1));
    F.push_back(1.0);
    return Distribution1D(std::move(y), std::move(F));
}

Distribution1D Distribution1D::from_atoms(std::vector<double> x, std::vector<double> w) {
    if (x.size() != w.size() || x.empty()) throw InvalidArgument("atoms need matching positions and weights");
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    double total = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw InvalidArgument("atom weights must be nonnegative");
        total += v;
    }
    if (!(total > 0.0)) throw InvalidArgument("atom weights sum to zero");
    std::vector<double> y;
    std::vector<double> F;
    double acc = 0.0;
    for (std::size_t k : order) {
        y.push_back(x[k]);
        F.push_back(acc);
        acc = std::min(acc + w[k] / total, 1.0);
        y.push_back(x[k]);
        F.push_back(acc);
    }
    F.back() = 1.0;
    return Distribution1D(std::move(y), std::move(F));
}

double Distribution1D::cdf(double y) const { return right_limit(y_, F_, y); }

double Distribution1D::quantile(double p) const {
    if (p <= 0.0) return y_.front();
    const auto j = static_cast<std::size_t>(std::lower_bound(F_.begin(), F_.end(), p) - F_.begin());
    if (j >= F_.size()) return y_.back();
    if (j == 0) return y_.front();
    const double dF = F_[j] - F_[j - 1];
    if (!(dF > 0.0) || y_[j] == y_[j - 1]) return y_[j];
    return y_[j - 1] + (p - F_[j - 1]) / dF * (y_[j] - y_[j - 1]);
}

double Distribution1D::mean() const {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < y_.size(); ++k) s += (F_[k + 1] - F_[k]) * 0.5 * (y_[k] + y_[k + 1]);
    return s;
}

Distribution1D gaussian_reference(double reach, double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(reach)) throw InvalidArgument("reference grid needs finite reach and positive spacing");
    const double half_width = std::ceil(std::abs(reach)) + 1.0;
    const auto cells = static_cast<std::size_t>(std::ceil(half_width / spacing));
    return Distribution1D::standard_gaussian(half_width, 2 * cells + 1);
}

DistanceReport distances(const Distribution1D& a, const Distribution1D& b) {
    const std::vector<double> ya(a.knots().begin(), a.knots().end());
    const std::vector<double> Fa(a.cdf_values().begin(), a.cdf_values().end());
    const std::vector<double> yb(b.knots().begin(), b.knots().end());
    const std::vector<double> Fb(b.cdf_values().begin(), b.cdf_values().end());

    std::vector<double> u;
    u.reserve(ya.size() + yb.size());
    std::merge(ya.begin(), ya.end(), yb.begin(), yb.end(), std::back_inserter(u));
    u.erase(std::unique(u.begin(), u.end()), u.end());

    DistanceReport r;
    double tv = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        // Atoms at u_j.
        const double ja = right_limit(ya, Fa, u[j]) - left_limit(ya, Fa, u[j]);
        const double jb = right_limit(yb, Fb, u[j]) - left_limit(yb, Fb, u[j]);
        tv += std::abs(ja - jb);
        if (j + 1 == u.size()) break;
        const double mid = 0.5 * (u[j] + u[j + 1]);
        const double a0 = piece_value(ya, Fa, mid, u[j]);
        const double a1 = piece_value(ya, Fa, mid, u[j + 1]);
        const double b0 = piece_value(yb, Fb, mid, u[j]);
        const double b1 = piece_value(yb, Fb, mid, u[j + 1]);
        r.w1 += linear_abs_integral(a0 - b0, a1 - b1, u[j + 1] - u[j]);
        tv += std::abs((a1 - a0) - (b1 - b0));
    }
    r.tv = std::min(0.5 * tv, 1.0);

    std::vector<double> p;
    p.reserve(Fa.size() + Fb.size());
    std::merge(Fa.begin(), Fa.end(), Fb.begin(), Fb.end(), std::back_inserter(p));
    p.erase(std::unique(p.begin(), p.end()), p.end());
    double w2 = 0.0;
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
        const double pm = 0.5 * (p[j] + p[j + 1]);
        const double e0 = quantile_piece(ya, Fa, pm, p[j]) - quantile_piece(yb, Fb, pm, p[j]);
        const double e1 = quantile_piece(ya, Fa, pm, p[j + 1]) - quantile_piece(yb, Fb, pm, p[j + 1]);
        w2 += (p[j + 1] - p[j]) * (e0 * e0 + e0 * e1 + e1 * e1) / 3.0;
    }
    r.w2 = std::sqrt(std::max(w2, 0.0));
    return r;
}

DistanceReport wasserstein_tv(const Measure1D& a, const Measure1D& b) {
    return distances(Distribution1D::from_measure(a), Distribution1D::from_measure(b));
}

Distribution1D pushforward(const Measure1D& m, const GridFunction& f) {
    if (!(f.grid == m.grid())) throw InvalidArgument("function and measure live on different grids");
    for (double v : f.values) {
        if (!std::isfinite(v)) throw InvalidArgument("pushforward of a non-finite function");
    }
    // Density changes and atoms keyed by position; a sorted sweep integrates them.
    struct Event {
        double slope = 0.0;
        double atom = 0.0;
    };
    std::map<double, Event> events;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double mass = m.segment_mass(i);
        if (!(mass > 0.0)) continue;
        const double a = std::min(f[i], f[i + 1]);
        const double b = std::max(f[i], f[i + 1]);
        if (b > a) {
            const double c = mass / (b - a);
            events[a].slope += c;
            events[b].slope -= c;
        } else {
            events[a].atom += mass;
        }
    }
    if (events.empty()) throw DegenerateMeasure("pushforward carries no mass");
    std::vector<double> y;
    std::vector<double> F;
    double density = 0.0;
    double acc = 0.0;
    double prev = events.begin()->first;
    for (const auto& [pos, ev] : events) {
        acc += std::max(density, 0.0) * (pos - prev);
        y.push_back(pos);
        F.push_back(acc);
        if (ev.atom > 0.0) {
            acc += ev.atom;
            y.push_back(pos);
            F.push_back(acc);
        }
        density += ev.slope;
        prev = pos;
    }
    for (double& v : F) v /= acc;
    for (std::size_t k = 1; k < F.size(); ++k) F[k] = std::max(F[k], F[k - 1]);
    if (y.size() == 1) {
        y.push_back(y.front());
        F.push_back(1.0);
    }
    F.front() = 0.0;
    F.back() = 1.0;
    return Distribution1D(std::move(y), std::move(F));
}

TransportMap1D monotone_map(const Measure1D& src, const Measure1D& dst) {
    const Grid1D& g = src.grid();
    const std::size_t n = g.size();
    const auto Fs = src.cdf();
    const auto Ss = src.survival();
    TransportMap1D t{g, std::vector<double>(n), 0.0, 0.0, 0.0, 0.0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) t.values[i] = inverse_cdf(dst, Fs[i], Ss[i]);

    const Grid1D& gd = dst.grid();
    const double inner_lo = gd.node(1);
    const double inner_hi = gd.node(gd.size() - 2);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (Fs[i] < kWindowMass || Ss[i] < kWindowMass) continue;
        if (t.values[i] < inner_lo || t.values[i] > inner_hi) continue;
        if (!any) t.window_lo = i;
        t.window_hi = i;
        any = true;
    }
    if (!any || t.window_hi - t.window_lo < 2 ||
        t.values[t.window_hi] - t.values[t.window_lo] < 4.0 * gd.spacing()) {
        throw ResolutionError("target measure is too narrow for the grid resolution");
    }
    t.max_slope = -std::numeric_limits<double>::infinity();
    t.min_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = t.window_lo; i < t.window_hi; ++i) {
        const double slope = (t.values[i + 1] - t.values[i]) / g.spacing();
        if (slope > t.max_slope) {
            t.max_slope = slope;
            t.slope_at = g.node(i);
        }
        t.min_slope = std::min(t.min_slope, slope);
    }
    for (std::size_t i = t.window_lo; i <= t.window_hi; ++i) {
        const double target = Fs[i] <= 0.5 ? dst.cdf_at(t.values[i]) : 1.0 - dst.survival_at(t.values[i]);
        t.max_cdf_defect = std::max(t.max_cdf_defect, std::abs(target - Fs[i]));
    }
    return t;
}

double stein_explicit_bound(double lambda) {
    return 4.0 * std::pow(2.0, lambda / 2.0) * std::sqrt(std::max(lambda - 1.0, 0.0));
}

SteinReport stein_report(const SpectralDecomposition& d, double tolerance) {
    if (d.count() < 2) throw InvalidArgument("Stein report needs the first nontrivial eigenpair");
    const Measure1D& m = d.op.measure();
    const auto& f = d.f1();
    const double norm = lp_norm(f, 2.0, m);
    const double mean = m.integrate(f.values);
    if (std::abs(norm - 1.0) > kNormalizationTol || std::abs(mean) > kNormalizationTol) {
        throw InvalidArgument("eigenfunction must be centered with unit L2 norm (norm " +
                              std::to_string(norm) + ", mean " + std::to_string(mean) + ")");
    }
    SteinReport r;
    r.lambda = d.lambda1();
    const auto gamma = d.op.carre_du_champ(f.values);
    double dev = 0.0;
    const auto w = m.weights();
    for (std::size_t i = 0; i < gamma.size(); ++i) dev += w[i] * std::abs(gamma[i] - r.lambda);
    r.gamma_deficit = dev / r.lambda;
    r.explicit_bound = stein_explicit_bound(r.lambda);

    const auto nu = pushforward(m, f);
    const double reach = std::max({m.grid().half_width(), std::abs(nu.support_min()), std::abs(nu.support_max())});
    const auto dist = distances(nu, gaussian_reference(reach, m.grid().spacing()));
    r.w1_actual = dist.w1;
    r.tv_actual = dist.tv;
    r.chain_holds = r.w1_actual <= 4.0 * r.gamma_deficit + tolerance;
    r.bound_holds = r.w1_actual <= r.explicit_bound + tolerance;
    return r;
}

}  // namespace rcdlab
