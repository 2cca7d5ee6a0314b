#include "rcdlab/obsdiam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rcdlab/errors.hpp"
#include "rcdlab/gaussian.hpp"
#include "rcdlab/spectrum.hpp"

namespace rcdlab {

namespace {

constexpr double kProfileWindow = 1e-6;
constexpr double kMassBoundTolerance = 1e-6;

void require_kappa(double kappa, double hi, const char* what) {
    if (!(kappa > 0.0 && kappa < hi)) {
        throw InvalidArgument(std::string(what) + ": kappa must lie in (0, " + std::to_string(hi) + "), got " +
                              std::to_string(kappa));
    }
}

// inf{x : F(x) > t}.
double strict_quantile(const Distribution1D& d, double t) {
    const auto y = d.knots();
    const auto F = d.cdf_values();
    const auto j = static_cast<std::size_t>(std::upper_bound(F.begin(), F.end(), t) - F.begin());
    if (j == 0) return y.front();
    if (j >= F.size()) return y.back();
    if (y[j] == y[j - 1]) return y[j];
    return y[j - 1] + (t - F[j - 1]) / (F[j] - F[j - 1]) * (y[j] - y[j - 1]);
}

}  // namespace

SepReport separation(const Measure1D& m, double kappa) {
    require_kappa(kappa, 0.5, "separation");
    SepReport r;
    r.kappa = kappa;
    r.lower = quantile(m, kappa);
    r.upper = upper_quantile(m, kappa);
    r.sep = std::max(r.upper - r.lower, 0.0);
    r.gaussian_sep = 2.0 * std::abs(gaussian::quantile(kappa));
    r.deficit = r.gaussian_sep - r.sep;
    return r;
}

SepReport separation(const Distribution1D& d, double kappa) {
    require_kappa(kappa, 0.5, "separation");
    SepReport r;
    r.kappa = kappa;
    r.lower = d.quantile(kappa);
    r.upper = strict_quantile(d, 1.0 - kappa);
    r.sep = std::max(r.upper - r.lower, 0.0);
    r.gaussian_sep = 2.0 * std::abs(gaussian::quantile(kappa));
    r.deficit = r.gaussian_sep - r.sep;
    return r;
}

ObsDiamReport observable_diameter(const Measure1D& m, double kappa, double tolerance) {
    require_kappa(kappa, 1.0, "observable diameter");
    const Grid1D& g = m.grid();
    const auto F = m.cdf();
    const auto S = m.survival();
    ObsDiamReport r;
    r.kappa = kappa;
    r.dobs = std::numeric_limits<double>::infinity();
    // Window [Q(p), Q(p + 1 - kappa)] is piecewise linear in p; its minimum sits where
    // either end crosses a node.
    auto consider = [&](double p) {
        p = std::clamp(p, 0.0, kappa);
        const double lo = p > 0.0 ? quantile(m, p) : g.node(0);
        const double hi = kappa - p > 0.0 ? upper_quantile(m, kappa - p) : g.node(g.size() - 1);
        if (hi - lo < r.dobs) {
            r.dobs = std::max(hi - lo, 0.0);
            r.window_lo = lo;
            r.window_hi = hi;
        }
    };
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (F[i] <= kappa) consider(F[i]);
        if (S[i] <= kappa) consider(kappa - S[i]);
    }
    r.sep_upper = separation(m, 0.5 * kappa).sep;
    r.holds = r.dobs <= r.sep_upper + tolerance;
    return r;
}

ObsDiamReport observable_diameter(const Distribution1D& d, double kappa, double tolerance) {
    require_kappa(kappa, 1.0, "observable diameter");
    const auto y = d.knots();
    const auto F = d.cdf_values();
    ObsDiamReport r;
    r.kappa = kappa;
    r.dobs = std::numeric_limits<double>::infinity();
    // Every candidate below carries mass >= 1 - kappa; an optimal window has an end at a knot.
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (F[k] + 1.0 - kappa <= 1.0) {
            const double hi = d.quantile(F[k] + 1.0 - kappa);
            if (hi - y[k] < r.dobs) {
                r.dobs = hi - y[k];
                r.window_lo = y[k];
                r.window_hi = hi;
            }
        }
        if (F[k] - 1.0 + kappa >= 0.0) {
            const double lo = strict_quantile(d, F[k] - 1.0 + kappa);
            if (y[k] - lo < r.dobs) {
                r.dobs = y[k] - lo;
                r.window_lo = lo;
                r.window_hi = y[k];
            }
        }
    }
    r.dobs = std::max(r.dobs, 0.0);
    r.sep_upper = separation(d, 0.5 * kappa).sep;
    r.holds = r.dobs <= r.sep_upper + tolerance;
    return r;
}

SepReport separation_on_cells(const Measure1D& m, double kappa) {
    require_kappa(kappa, 0.5, "separation");
    const Grid1D& g = m.grid();
    const std::size_t cells = g.size() - 1;
    std::size_t i = 0;
    double left = m.segment_mass(0);
    while (left < kappa && i + 1 < cells) left += m.segment_mass(++i);
    std::size_t j = cells - 1;
    double right = m.segment_mass(j);
    while (right < kappa && j > 0) right += m.segment_mass(--j);
    SepReport r;
    r.kappa = kappa;
    r.lower = g.node(i + 1);
    r.upper = g.node(j);
    r.sep = std::max(r.upper - r.lower, 0.0);
    r.gaussian_sep = 2.0 * std::abs(gaussian::quantile(kappa));
    r.deficit = r.gaussian_sep - r.sep;
    return r;
}

double observable_diameter_on_cells(const Measure1D& m, double kappa) {
    require_kappa(kappa, 1.0, "observable diameter");
    const std::size_t cells = m.grid().size() - 1;
    std::size_t best = cells;
    for (std::size_t i = 0; i < cells; ++i) {
        double mass = 0.0;
        for (std::size_t j = i; j < cells && j - i < best; ++j) {
            mass += m.segment_mass(j);
            if (mass >= 1.0 - kappa) {
                best = j - i + 1;
                break;
            }
        }
    }
    return static_cast<double>(best) * m.grid().spacing();
}

double gaussian_observable_diameter(double kappa) {
    require_kappa(kappa, 1.0, "observable diameter");
    return 2.0 * std::abs(gaussian::quantile(0.5 * kappa));
}

IsoperimetryReport isoperimetric_check(const Measure1D& m) {
    const Grid1D& g = m.grid();
    const auto F = m.cdf();
    const auto S = m.survival();
    IsoperimetryReport r;
    r.min_profile_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (F[i] < kProfileWindow || S[i] < kProfileWindow) continue;
        const double a = F[i] <= 0.5 ? gaussian::quantile(F[i]) : -gaussian::quantile(S[i]);
        const double ratio = std::exp(-m.normalized_potential(i)) / gaussian::density(a);
        if (ratio < r.min_profile_ratio) {
            r.min_profile_ratio = ratio;
            r.at = g.node(i);
        }
    }
    if (!std::isfinite(r.min_profile_ratio)) throw DegenerateMeasure("no node inside the profile window");
    r.holds = r.min_profile_ratio >= 1.0 - kObsTolerance;
    return r;
}

GrowthReport neighborhood_growth_check(const Measure1D& m, const SetOnGrid& a, double t, double tolerance) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("neighbourhood radius must be finite and >= 0");
    if (a.is_empty() || a.is_full()) throw InvalidArgument("neighbourhood growth needs a proper nonempty set");
    GrowthReport r;
    r.t = t;
    r.mass = a.mass(m);
    if (!(r.mass > 0.0 && r.mass < 1.0)) throw InvalidArgument("set mass must lie in (0, 1)");
    const auto cells = static_cast<std::size_t>(std::ceil(t / m.grid().spacing() - 1e-9));
    r.lhs = a.dilate(cells).mass(m);
    r.rhs = gaussian::cdf(gaussian::quantile(r.mass) + t);
    r.holds = r.lhs >= r.rhs - tolerance;
    return r;
}

double set_distance(const SetOnGrid& a, const SetOnGrid& b) {
    if (!(a.grid() == b.grid())) throw InvalidArgument("sets live on different grids");
    if (a.is_empty() || b.is_empty()) throw InvalidArgument("distance to an empty set");
    const std::size_t k = a.cell_count();
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t best = kNone;
    std::size_t last_a = kNone;
    std::size_t last_b = kNone;
    for (std::size_t i = 0; i < k; ++i) {
        if (a.contains(i)) {
            if (last_b != kNone) best = std::min(best, i - last_b);
            last_a = i;
        }
        if (b.contains(i)) {
            if (last_a != kNone) best = std::min(best, i - last_a);
            last_b = i;
        }
    }
    // Adjacent or shared cells touch; otherwise the gap is (index difference - 1) cells.
    return best <= 1 ? 0.0 : static_cast<double>(best - 1) * a.grid().spacing();
}

CloseMassReport closemass_check(const Measure1D& m, const SetOnGrid& a1, const SetOnGrid& a2, double tolerance) {
    const double m1 = a1.mass(m);
    const double m2 = a2.mass(m);
    if (!(m1 > 0.0 && m1 < 1.0 && m2 > 0.0 && m2 < 1.0)) throw InvalidArgument("set masses must lie in (0, 1)");
    CloseMassReport r;
    r.distance = set_distance(a1, a2);
    r.bound = -gaussian::quantile(m1) - gaussian::quantile(m2);
    r.holds = r.distance <= r.bound + tolerance;
    return r;
}

double gaussian_window_stability(double R, double s_max) {
    if (!(R > 0.0) || !(s_max > 0.0)) throw InvalidArgument("window length and range must be positive");
    const double centred = gaussian::cdf(0.5 * R) - gaussian::cdf(-0.5 * R);
    double best = std::numeric_limits<double>::infinity();
    constexpr int kSamples = 200;
    for (int k = 1; k <= kSamples; ++k) {
        const double s = s_max * k / kSamples;
        const double shifted = gaussian::cdf(s + 0.5 * R) - gaussian::cdf(s - 0.5 * R);
        best = std::min(best, (centred - shifted) / (s * s));
    }
    return best;
}

ConverseDiagnostics converse_diagnostics(const Measure1D& m, double kappa, std::optional<double> lambda1) {
    require_kappa(kappa, 0.5, "converse diagnostics");
    const Measure1D c = center_median(m);
    const Grid1D& g = c.grid();
    const std::size_t n = g.size();
    const SepReport sr = separation(c, 0.5 * kappa);

    ConverseDiagnostics d;
    d.kappa = kappa;
    d.eta = std::max(sr.deficit, 0.0);
    d.a_minus = sr.lower;
    d.a_plus = sr.upper;
    if (d.a_minus <= g.node(1) || d.a_plus >= g.node(n - 2)) {
        throw ResolutionError("witness quantiles fall in an end cell; kappa is too small for the grid");
    }
    d.alpha_minus = gaussian::quantile(c.cdf_at(d.a_minus));
    d.alpha_plus = -gaussian::quantile(c.survival_at(d.a_plus));

    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = c.normalized_potential(i) - gaussian::potential(g.node(i));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.node(i);
        if (x >= d.a_minus && x <= d.a_plus) d.sup_phi_dev_core = std::max(d.sup_phi_dev_core, std::abs(h[i]));
    }

    const double root = std::sqrt(d.eta);
    d.a_eta = root > 0.0 && root < 0.5 ? std::abs(gaussian::quantile(root)) : (root > 0.0 ? 0.0 : g.half_width());
    d.a_eta = std::min(d.a_eta, g.half_width());
    // h is convex, so the nodes where it stays below the threshold form an interval.
    const double threshold = std::pow(d.eta, 0.1);
    const std::size_t c0 = g.center_index();
    std::size_t reach = 0;
    while (reach < c0 && g.node(c0 + reach + 1) <= d.a_eta && h[c0 + reach + 1] <= threshold &&
           h[c0 - reach - 1] <= threshold) {
        ++reach;
    }
    d.b_eta = h[c0] <= threshold ? g.node(c0 + reach) : 0.0;
    for (std::size_t k = 0; k <= reach; ++k) {
        d.sup_phi_dev_extended = std::max({d.sup_phi_dev_extended, std::abs(h[c0 + k]), std::abs(h[c0 - k])});
    }

    d.mean = c.mean();
    d.variance = c.variance();
    d.var_deficit = 1.0 - d.variance;
    d.lambda1 = lambda1 ? *lambda1 : eigenpairs(assemble_dirichlet(m), 2, false).lambda1();
    d.gap_deficit = d.lambda1 - 1.0;

    // Mass of the s-neighbourhoods of the witness sets.
    const double slack = std::sqrt(2.0 / M_PI) * 0.5 * d.eta;
    const double r = d.a_plus - d.a_minus;
    d.mass_bounds_hold = true;
    for (double s : {0.0, 0.5 * r, r}) {
        MassBoundCheck lo;
        lo.s = s;
        lo.side = 1;
        lo.lhs = c.cdf_at(d.a_minus + s);
        lo.rhs = gaussian::cdf(gaussian::quantile(c.cdf_at(d.a_minus)) + s) + slack;
        lo.holds = lo.lhs <= lo.rhs + kMassBoundTolerance;
        MassBoundCheck hi;
        hi.s = s;
        hi.side = 2;
        hi.lhs = c.survival_at(d.a_plus - s);
        hi.rhs = gaussian::cdf(gaussian::quantile(c.survival_at(d.a_plus)) + s) + slack;
        hi.holds = hi.lhs <= hi.rhs + kMassBoundTolerance;
        d.mass_bounds_hold = d.mass_bounds_hold && lo.holds && hi.holds;
        d.mass_bounds.push_back(lo);
        d.mass_bounds.push_back(hi);
    }
    return d;
}

}  // namespace rcdlab
