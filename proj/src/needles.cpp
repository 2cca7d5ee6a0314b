#include "rcdlab/needles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rcdlab/errors.hpp"

namespace rcdlab {

namespace {

constexpr double kCenteringTol = 1e-8;
constexpr double kScoreTol = 1e-8;
constexpr double kEstimateTol = 1e-8;
constexpr double kBoxSlack = 1e-12;

bool inside(double x, const std::pair<double, double>& range) {
    return x >= range.first - kBoxSlack && x <= range.second + kBoxSlack;
}

// Visits every multi-index of the given extents in lexicographic order.
template <class Fn>
void for_each_index(const std::vector<std::size_t>& extents, Fn&& fn) {
    std::vector<std::size_t> idx(extents.size(), 0);
    if (extents.empty()) {
        fn(idx);
        return;
    }
    while (true) {
        fn(idx);
        std::size_t k = extents.size();
        while (k > 0) {
            --k;
            if (++idx[k] < extents[k]) break;
            idx[k] = 0;
            if (k == 0) return;
        }
    }
}

double weighted_sum(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
}

std::vector<double> cumulative(const std::vector<double>& slopes, double h) {
    std::vector<double> u(slopes.size() + 1, 0.0);
    for (std::size_t i = 0; i < slopes.size(); ++i) u[i + 1] = u[i] + slopes[i] * h;
    return u;
}

std::vector<double> random_profile(std::mt19937_64& rng, std::size_t n, double bound, double h) {
    std::uniform_real_distribution<double> slope(-bound, bound);
    std::vector<double> s(n - 1);
    for (double& v : s) v = slope(rng);
    return cumulative(s, h);
}

}  // namespace

ProductMeasure::ProductMeasure(std::vector<Measure1D> factors) : factors_(std::move(factors)) {
    if (factors_.empty() || factors_.size() > kMaxFactors) {
        throw InvalidArgument("product measure takes 1 to 3 factors, got " + std::to_string(factors_.size()));
    }
}

std::size_t ProductMeasure::cell_count() const noexcept {
    std::size_t c = 1;
    for (const auto& f : factors_) c *= f.size();
    return c;
}

double ProductMeasure::weight(const std::vector<std::size_t>& index) const {
    if (index.size() != factors_.size()) throw InvalidArgument("index rank differs from the product dimension");
    double w = 1.0;
    for (std::size_t k = 0; k < index.size(); ++k) w *= factors_[k].weights()[index[k]];
    return w;
}

double ProductMeasure::total_mass() const {
    double t = 1.0;
    for (const auto& f : factors_) {
        const auto w = f.weights();
        t *= std::accumulate(w.begin(), w.end(), 0.0);
    }
    return t;
}

std::vector<double> ProductMeasure::marginal_weights(std::size_t axis) const {
    const auto w = factor(axis).weights();
    double rest = 1.0;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        if (k == axis) continue;
        const auto wk = factors_[k].weights();
        rest *= std::accumulate(wk.begin(), wk.end(), 0.0);
    }
    std::vector<double> out(w.begin(), w.end());
    for (double& v : out) v *= rest;
    return out;
}

double ProductMeasure::box_mass(const std::vector<std::pair<double, double>>& box) const {
    if (box.size() != factors_.size()) throw InvalidArgument("box rank differs from the product dimension");
    std::vector<std::size_t> extents;
    for (const auto& f : factors_) extents.push_back(f.size());
    double s = 0.0;
    for_each_index(extents, [&](const std::vector<std::size_t>& idx) {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (!inside(factors_[k].grid().node(idx[k]), box[k])) return;
        }
        s += weight(idx);
    });
    return s;
}

double ProductMeasure::spectral_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& f : factors_) gap = std::min(gap, eigenpairs(assemble_dirichlet(f), 2, false).lambda1());
    return gap;
}

ProductMeasure product_measure(std::vector<Measure1D> factors, std::size_t max_cells) {
    if (factors.empty() || factors.size() > kMaxFactors) {
        throw InvalidArgument("product measure takes 1 to 3 factors, got " + std::to_string(factors.size()));
    }
    auto cells = [&] {
        std::size_t c = 1;
        for (const auto& f : factors) c *= f.size();
        return c;
    };
    while (cells() > max_cells) {
        auto it = std::max_element(factors.begin(), factors.end(),
                                   [](const Measure1D& a, const Measure1D& b) { return a.size() < b.size(); });
        const std::size_t n = half_resolution_size(it->size());
        if (n < 3 || n >= it->size()) throw InvalidArgument("tensor grid cannot be reduced below the cell budget");
        const Grid1D coarse = build_grid(it->grid().half_width(), n);
        *it = normalize(it->potential().resample(coarse));
    }
    return ProductMeasure(std::move(factors));
}

NeedleFamily disintegrate_axis(const ProductMeasure& p, std::size_t axis, const GridFunction& f) {
    if (axis >= p.dimension()) throw InvalidArgument("needle axis out of range");
    const Measure1D& m = p.factor(axis);
    if (!(f.grid == m.grid())) throw InvalidArgument("function is not on the axis factor grid");
    const double mean = m.integrate(f.values);
    if (std::abs(mean) > kCenteringTol) {
        throw InvalidArgument("guiding decomposition needs a centred function; mean is " + std::to_string(mean));
    }
    std::vector<Measure1D> quotient;
    std::size_t multiplicity = 1;
    for (std::size_t k = 0; k < p.dimension(); ++k) {
        if (k == axis) continue;
        quotient.push_back(p.factor(k));
        multiplicity *= p.factor(k).size();
    }
    const Grid1D& g = m.grid();
    std::vector<double> resid(g.size());
    double fmax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        resid[i] = f[i] - g.node(i);
        fmax = std::max(fmax, std::abs(f[i]));
    }
    std::size_t zero_cells = 0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (std::abs(f[i]) <= 1e-14 * fmax && std::abs(f[i + 1]) <= 1e-14 * fmax) ++zero_cells;
    }
    return NeedleFamily{axis,
                        m,
                        std::move(quotient),
                        multiplicity,
                        f,
                        mean,
                        m.integrate(resid),
                        m.potential().convexity_modulus() >= 1.0 - kTolConvexity,
                        zero_cells};
}

DisintegrationCheck disintegration_check(const ProductMeasure& p, const NeedleFamily& nf,
                                         const std::vector<std::pair<double, double>>& box) {
    if (box.size() != p.dimension()) throw InvalidArgument("box rank differs from the product dimension");
    DisintegrationCheck r;
    r.mu_mass = p.box_mass(box);

    // m_q(A) is the same for every needle whose quotient point lies in the box.
    const auto w = nf.needle.weights();
    double needle_set = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (inside(nf.needle.grid().node(i), box[nf.axis])) needle_set += w[i];
    }
    std::vector<std::size_t> extents;
    std::vector<std::pair<double, double>> qbox;
    for (std::size_t k = 0; k < p.dimension(); ++k) {
        if (k == nf.axis) continue;
        qbox.push_back(box[k]);
    }
    for (const auto& q : nf.quotient) extents.push_back(q.size());
    for_each_index(extents, [&](const std::vector<std::size_t>& idx) {
        double wq = 1.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (!inside(nf.quotient[k].grid().node(idx[k]), qbox[k])) return;
            wq *= nf.quotient[k].weights()[idx[k]];
        }
        r.needle_mass += wq * needle_set;
    });
    r.defect = std::abs(r.needle_mass - r.mu_mass);
    return r;
}

GuidingReport guiding_function_check(const ProductMeasure& p, std::size_t axis, const GridFunction& f_axis,
                                     std::size_t trials, std::uint64_t seed) {
    if (axis >= p.dimension()) throw InvalidArgument("guiding axis out of range");
    const Measure1D& m = p.factor(axis);
    if (!(f_axis.grid == m.grid())) throw InvalidArgument("function is not on the axis factor grid");
    const Grid1D& g = m.grid();
    const std::size_t n = g.size();
    const double h = g.spacing();
    const auto w = m.weights();
    const auto x = g.nodes();
    const auto& f = f_axis.values;

    GuidingReport r;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (f[i + 1] < f[i]) r.f_monotone = false;
    }
    r.score_g = weighted_sum(w, x, f);
    r.max_competitor_score = -std::numeric_limits<double>::infinity();
    auto consider = [&](double score, const std::string& label) {
        ++r.competitors;
        if (score > r.max_competitor_score) {
            r.max_competitor_score = score;
            r.best_competitor = label;
        }
    };

    std::vector<double> u(n);
    auto axis_score = [&](auto&& profile, const std::string& label) {
        for (std::size_t i = 0; i < n; ++i) u[i] = profile(x[i]);
        consider(weighted_sum(w, u, f), label);
    };
    axis_score([](double t) { return 0.5 * t; }, "ramp x/2");
    axis_score([](double t) { return -t; }, "ramp -x");
    for (double s : {0.5, 1.0, 2.0, 4.0}) {
        for (double c : {-1.0, 0.0, 1.0}) {
            axis_score([s, c](double t) { return s * std::tanh((t - c) / s); },
                       "tanh s=" + std::to_string(s) + " c=" + std::to_string(c));
        }
    }
    for (double c : {0.5, 1.0, 2.0, 3.0}) {
        axis_score([c](double t) { return std::clamp(t, -c, c); }, "clip " + std::to_string(c));
    }
    for (double c : {-1.0, 0.0, 1.0}) {
        axis_score([c](double t) { return std::min(t, c); }, "clip above " + std::to_string(c));
        axis_score([c](double t) { return std::max(t, c); }, "clip below " + std::to_string(c));
    }

    // Quotient nodes for the multivariate competitors.
    std::vector<std::size_t> extents;
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < p.dimension(); ++k) {
        if (k == axis) continue;
        others.push_back(k);
        extents.push_back(p.factor(k).size());
    }
    const double f_mean = m.integrate(f);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t kinds = p.dimension() == 1 ? 2 : 3;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t kind = t % kinds;
        if (kind == 0) {
            const auto a = random_profile(rng, n, 1.0, h);
            consider(weighted_sum(w, a, f), "random axis profile " + std::to_string(t));
            continue;
        }
        if (p.dimension() == 1) {
            const auto a1 = random_profile(rng, n, 1.0, h);
            const auto a2 = random_profile(rng, n, 1.0, h);
            for (std::size_t i = 0; i < n; ++i) u[i] = std::max(a1[i], a2[i]);
            consider(weighted_sum(w, u, f), "random max of profiles " + std::to_string(t));
            continue;
        }
        // Separable sum sum_k a_k(x_k) with per-axis slope bounds |v_k| for a unit v is
        // 1-Lipschitz for the Euclidean product metric.
        auto draw = [&](std::vector<double>& a_axis, std::vector<std::vector<double>>& a_rest) {
            std::vector<double> v(p.dimension());
            double norm = 0.0;
            for (double& c : v) {
                c = normal(rng);
                norm += c * c;
            }
            norm = std::sqrt(norm);
            a_axis = random_profile(rng, n, std::abs(v[axis]) / norm, h);
            a_rest.clear();
            for (std::size_t k : others) {
                const Measure1D& mk = p.factor(k);
                a_rest.push_back(random_profile(rng, mk.size(), std::abs(v[k]) / norm, mk.grid().spacing()));
            }
        };
        std::vector<double> a1;
        std::vector<std::vector<double>> b1;
        draw(a1, b1);
        if (kind == 1) {
            double rest = 0.0;
            for (std::size_t j = 0; j < others.size(); ++j) rest += p.factor(others[j]).integrate(b1[j]);
            consider(weighted_sum(w, a1, f) + rest * f_mean, "random separable " + std::to_string(t));
            continue;
        }
        std::vector<double> a2;
        std::vector<std::vector<double>> b2;
        draw(a2, b2);
        std::vector<double> nu;
        std::vector<double> B1;
        std::vector<double> B2;
        for_each_index(extents, [&](const std::vector<std::size_t>& idx) {
            double wq = 1.0;
            double s1 = 0.0;
            double s2 = 0.0;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                wq *= p.factor(others[j]).weights()[idx[j]];
                s1 += b1[j][idx[j]];
                s2 += b2[j][idx[j]];
            }
            nu.push_back(wq);
            B1.push_back(s1);
            B2.push_back(s2);
        });
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t q = 0; q < nu.size(); ++q) s += nu[q] * std::max(a1[i] + B1[q], a2[i] + B2[q]);
            u[i] = s;
        }
        consider(weighted_sum(w, u, f), "random max of separables " + std::to_string(t));
    }
    r.holds = r.score_g >= r.max_competitor_score - kScoreTol;
    return r;
}

NeedleEstimates needle_estimates_report(const NeedleFamily& nf, const SpectralDecomposition& d, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
    if (!(d.op.grid() == nf.needle.grid())) throw InvalidArgument("decomposition is not on the needle grid");
    NeedleEstimates r;
    r.delta = delta;
    r.epsilon = std::max(d.lambda1() - 1.0, 0.0);
    r.multiplicity = nf.multiplicity;
    const auto& f = nf.f.values;
    std::vector<double> f2(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) f2[i] = f[i] * f[i];
    r.int_f2 = nf.needle.integrate(f2);
    r.int_grad2 = d.op.form(f, f);
    const double root = std::sqrt(r.epsilon);
    r.f2_lower = 1.0 - (48.0 * root + 2.0 * r.epsilon) / delta;
    r.f2_upper = 1.0 + 48.0 * root / delta;
    r.grad_upper = r.int_f2 + 2.0 * r.epsilon / delta;
    r.sandwich_holds = r.int_f2 >= r.f2_lower - kEstimateTol && r.int_f2 <= r.f2_upper + kEstimateTol;
    r.gradient_holds = r.int_grad2 >= r.int_f2 - kEstimateTol && r.int_grad2 <= r.grad_upper + kEstimateTol;
    r.passing_mass = r.sandwich_holds && r.gradient_holds ? 1.0 : 0.0;
    r.mass_holds = r.passing_mass >= 1.0 - delta;
    return r;
}

FgH1Report fg_h1_report(const NeedleFamily& nf, const SpectralDecomposition& d, double theta) {
    if (!(theta > 0.0)) throw InvalidArgument("theta must be positive");
    if (!(d.op.grid() == nf.needle.grid())) throw InvalidArgument("decomposition is not on the needle grid");
    const Measure1D& m = nf.needle;
    const Grid1D& g = m.grid();
    const std::size_t n = g.size();
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = nf.f[i] - g.node(i);

    FgH1Report r;
    r.theta = theta;
    r.epsilon = std::max(d.lambda1() - 1.0, 0.0);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = diff[i] * diff[i];
    r.l2_dev = m.integrate(sq);
    r.h1_dev = d.op.form(diff, diff);
    r.c_q = m.integrate(diff);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (diff[i] - r.c_q) * (diff[i] - r.c_q);
    r.per_needle_dev = m.integrate(sq);
    r.g_mean = m.mean();
    r.c_q_mean_dev = std::abs(r.g_mean + r.c_q);

    // g pushes the product forward to the axis factor itself.
    const auto dist = distances(Distribution1D::from_measure(m), gaussian_reference(g.half_width(), g.spacing()));
    r.w1_g = dist.w1;
    r.tv_g = dist.tv;
    if (r.epsilon > 0.0) {
        r.l2_ratio = r.l2_dev / std::pow(r.epsilon, 0.1 - theta);
        r.h1_ratio = r.h1_dev / std::pow(r.epsilon, 0.05 - theta);
        r.w1_ratio = r.w1_g / std::pow(r.epsilon, 0.05 - theta);
    } else {
        r.l2_ratio = r.h1_ratio = r.w1_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace rcdlab
