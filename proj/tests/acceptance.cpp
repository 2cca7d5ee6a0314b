// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero when a
// criterion fails that is not listed in kDocumentedFailures (see README).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rcdlab/cli.hpp"
#include "rcdlab/errors.hpp"
#include "rcdlab/gaussian.hpp"
#include "rcdlab/hermite.hpp"
#include "rcdlab/needles.hpp"
#include "rcdlab/obsdiam.hpp"
#include "rcdlab/spectrum.hpp"
#include "rcdlab/transport.hpp"

using namespace rcdlab;

namespace {

constexpr double kR = 10.0;
constexpr std::size_t kN = 4001;

const std::vector<double> kEpsSweep = {0.3, 0.1, 0.03, 0.01};
const std::vector<double> kScaledSweep = {0.05, 0.1, 0.2};
const std::set<int> kDocumentedFailures = {7, 10};

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

Measure1D measure_of(const PotentialSpec& spec, std::size_t n = kN, double R = kR) {
    return normalize(make_potential(spec, build_grid(R, n)));
}

SpectralDecomposition decompose(const Measure1D& m, std::size_t k = 6) {
    return eigenpairs(assemble_dirichlet(m), k, false);
}

std::vector<PotentialSpec> presets() {
    return {PotentialSpec::gaussian(),          PotentialSpec::scaled_gaussian(0.2),
            PotentialSpec::scaled_gaussian(1.0), PotentialSpec::cosine_perturbed(0.1),
            PotentialSpec::cosine_perturbed(0.3), PotentialSpec::gaussian(0.7)};
}

double ratio_spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? *hi / *lo : INFINITY;
}

// x^2/2 plus a random sum of convex bumps, so psi'' >= 1 by construction.
std::vector<double> random_convex_table(std::mt19937_64& rng, const Grid1D& g) {
    std::uniform_real_distribution<double> amp(0.0, 0.5), freq(0.2, 2.0), phase(0.0, 6.283), ctr(-3.0, 3.0),
        steep(0.3, 3.0);
    const double a = amp(rng), w = freq(rng), ph = phase(rng);
    const double b = amp(rng), s = steep(rng), c = ctr(rng);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i);
        const double t = s * (x - c);
        const double logcosh = std::abs(t) + std::log1p(std::exp(-2.0 * std::abs(t))) - std::log(2.0);
        v[i] = 0.5 * x * x + a * (0.5 * w * w * x * x + std::cos(w * x + ph)) / (w * w) + b * logcosh / s;
    }
    return v;
}

Verdict gaussian_spectrum() {
    const auto m = measure_of(PotentialSpec::gaussian());
    const auto d = decompose(m);
    double eig_err = 0.0;
    double fn_err = 0.0;
    double fact = 1.0;
    for (int j = 0; j < 6; ++j) {
        eig_err = std::max(eig_err, std::abs(d.eigenvalues[j] - j));
        if (j > 0) fact *= j;
        std::vector<double> diff(m.size()), sum(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double h = hermite_eval(j, m.grid().node(i)) / std::sqrt(fact);
            diff[i] = h - d.eigenfunctions[j][i];
            sum[i] = h + d.eigenfunctions[j][i];
        }
        fn_err = std::max(fn_err, std::min(lp_norm(diff, 2.0, m), lp_norm(sum, 2.0, m)));
    }
    return {eig_err <= 1e-4 && fn_err <= 1e-3,
            "max |lambda_j - j| " + fmt(eig_err) + ", max L2 eigenfunction error " + fmt(fn_err)};
}

Verdict lichnerowicz() {
    std::mt19937_64 rng(101);
    const auto g = build_grid(kR, kN);
    double worst = INFINITY;
    for (int t = 0; t < 50; ++t) {
        const auto m = normalize(make_potential(PotentialSpec::from_table(random_convex_table(rng, g)), g));
        worst = std::min(worst, decompose(m, 2).lambda1());
    }
    return {worst >= 1.0 - 1e-6, "min lambda1 over 50 random tables " + fmt(worst)};
}

Verdict key_lemma() {
    bool ok = true;
    double worst_margin = INFINITY;
    for (double eps : kEpsSweep) {
        const auto d = decompose(measure_of(PotentialSpec::cosine_perturbed(eps)), 2);
        for (double p : {1.0, 1.5}) {
            const auto r = key_lemma_report(d, p);
            ok = ok && r.rhs && r.lhs <= *r.rhs;
            if (r.rhs) worst_margin = std::min(worst_margin, *r.rhs - r.lhs);
        }
    }
    double scaled_lhs = 0.0;
    for (double a : kScaledSweep) {
        const auto d = decompose(measure_of(PotentialSpec::scaled_gaussian(a)), 2);
        for (double p : {1.0, 1.5}) scaled_lhs = std::max(scaled_lhs, std::abs(key_lemma_report(d, p).lhs));
    }
    ok = ok && scaled_lhs <= 1e-6;
    return {ok, "min rhs - lhs on cosine sweep " + fmt(worst_margin) + ", max |lhs| on scaled " + fmt(scaled_lhs)};
}

Verdict hermite_mechanism() {
    bool ok = true;
    std::vector<double> gap, dist2, dist3;
    for (double eps : kEpsSweep) {
        const auto d = decompose(measure_of(PotentialSpec::cosine_perturbed(eps)));
        const auto r2 = hermite_residual_report(d, 2);
        const auto r3 = hermite_residual_report(d, 3);
        ok = ok && r2.holds && r3.holds;
        gap.push_back(d.lambda1() - 1.0);
        dist2.push_back(r2.normalized_distance);
        dist3.push_back(r3.normalized_distance);
    }
    for (double a : kScaledSweep) {
        const auto d = decompose(measure_of(PotentialSpec::scaled_gaussian(a)));
        ok = ok && hermite_residual_report(d, 2).holds && hermite_residual_report(d, 3).holds;
    }
    const double s2 = cli::loglog_slope(gap, dist2);
    const double s3 = cli::loglog_slope(gap, dist3);
    ok = ok && s2 >= 0.45 && s3 >= 0.45;
    return {ok, "eigenvalue located at every point; slopes n=2 " + fmt(s2) + ", n=3 " + fmt(s3)};
}

Verdict stein_w1() {
    bool ok = true;
    std::vector<double> gap, w1;
    double worst_margin = INFINITY;
    for (double eps : kEpsSweep) {
        const auto d = decompose(measure_of(PotentialSpec::cosine_perturbed(eps)), 2);
        const auto s = stein_report(d);
        ok = ok && s.bound_holds;
        worst_margin = std::min(worst_margin, s.explicit_bound - s.w1_actual);
        gap.push_back(d.lambda1() - 1.0);
        w1.push_back(s.w1_actual);
    }
    for (double a : kScaledSweep) {
        const auto s = stein_report(decompose(measure_of(PotentialSpec::scaled_gaussian(a)), 2));
        ok = ok && s.bound_holds;
        worst_margin = std::min(worst_margin, s.explicit_bound - s.w1_actual);
    }
    const double g_w1 = stein_report(decompose(measure_of(PotentialSpec::gaussian()), 2)).w1_actual;
    const double slope = cli::loglog_slope(gap, w1);
    ok = ok && g_w1 <= 1e-4 && slope >= 0.45;
    return {ok, "min bound - W1 " + fmt(worst_margin) + ", Gaussian W1 " + fmt(g_w1) + ", slope " + fmt(slope)};
}

Verdict perturbed_eigenvalue() {
    std::mt19937_64 rng(606);
    std::uniform_int_distribution<int> half(10, 99);
    std::uniform_real_distribution<double> width(3.0, 6.0), u(-1.0, 1.0), alpha(0.0, 10.0);
    bool ok = true;
    double worst = -INFINITY;
    for (int t = 0; t < 20; ++t) {
        const auto g = build_grid(width(rng), static_cast<std::size_t>(2 * half(rng) + 1));
        const auto m = normalize(make_potential(PotentialSpec::from_table(random_convex_table(rng, g)), g));
        std::vector<double> f(g.size());
        for (double& v : f) v = u(rng);
        const auto r = perturbed_eigenvalue_check(assemble_dirichlet(m), f, alpha(rng));
        ok = ok && r.holds();
        worst = std::max(worst, r.distance / r.g_norm);
    }
    return {ok, "max distance / ||g|| over 20 instances " + fmt(worst)};
}

// Every assignment of cells to A1, A2 or neither; gap counted in empty cells.
double brute_separation_cells(const std::vector<double>& mass, double kappa) {
    const std::size_t k = mass.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 3;
    long best = 0;
    std::vector<int> label(k);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            label[i] = static_cast<int>(c % 3);
            c /= 3;
            if (label[i] == 1) m1 += mass[i];
            if (label[i] == 2) m2 += mass[i];
        }
        if (m1 < kappa || m2 < kappa) continue;
        long gap = static_cast<long>(k), last1 = -1000, last2 = -1000;
        for (std::size_t i = 0; i < k; ++i) {
            const long ii = static_cast<long>(i);
            if (label[i] == 1) {
                gap = std::min(gap, ii - last2);
                last1 = ii;
            } else if (label[i] == 2) {
                gap = std::min(gap, ii - last1);
                last2 = ii;
            }
        }
        best = std::max(best, gap - 1);
    }
    return static_cast<double>(best);
}

// Largest partial diameter over cell slopes in {-1, 0, 1}, in units of h.
double brute_dobs_cells(const std::vector<double>& mass, double kappa) {
    const int k = static_cast<int>(mass.size());
    std::size_t total = 1;
    for (int i = 0; i < k; ++i) total *= 3;
    const int span = 2 * k + 1;
    std::vector<double> cell(span), atom(span + 1);
    int best = 0;
    for (std::size_t code = 0; code < total; ++code) {
        std::fill(cell.begin(), cell.end(), 0.0);
        std::fill(atom.begin(), atom.end(), 0.0);
        std::size_t c = code;
        int f = 0;
        for (int i = 0; i < k; ++i) {
            const int s = static_cast<int>(c % 3) - 1;
            c /= 3;
            if (s == 0) {
                atom[f + k] += mass[i];
            } else {
                cell[std::min(f, f + s) + k] += mass[i];
            }
            f += s;
        }
        int shortest = span;
        for (int a = 0; a <= span; ++a) {
            double acc = atom[a];
            if (acc >= 1.0 - kappa) {
                shortest = 0;
                break;
            }
            for (int b = a + 1; b <= span && b - a < shortest; ++b) {
                acc += cell[b - 1] + atom[b];
                if (acc >= 1.0 - kappa) {
                    shortest = b - a;
                    break;
                }
            }
        }
        best = std::max(best, shortest);
    }
    return static_cast<double>(best);
}

std::vector<double> cell_masses(const Measure1D& m) {
    std::vector<double> out(m.size() - 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.segment_mass(i);
    return out;
}

Verdict observable_chain() {
    bool chain = true;
    double worst = -INFINITY;
    for (const auto& spec : presets()) {
        const auto m = measure_of(spec);
        for (double kappa : {0.1, 0.3, 0.5}) {
            const double dobs = observable_diameter(m, kappa).dobs;
            const auto sep = separation(m, kappa / 2.0);
            const double g_dobs = gaussian_observable_diameter(kappa);
            worst = std::max({worst, dobs - sep.sep, sep.sep - sep.gaussian_sep, std::abs(sep.gaussian_sep - g_dobs)});
            chain = chain && dobs <= sep.sep + 1e-3 && sep.sep <= sep.gaussian_sep + 1e-3 &&
                    std::abs(sep.gaussian_sep - g_dobs) <= 1e-3;
        }
    }
    int sep_mismatch = 0, sep_cases = 0, dobs_mismatch = 0, dobs_cases = 0;
    for (const auto& spec : presets()) {
        const auto m14 = measure_of(spec, 15, 4.0);
        const double h14 = m14.grid().spacing();
        const auto mass14 = cell_masses(m14);
        for (double kappa : {0.05, 0.15, 0.25}) {
            ++sep_cases;
            if (std::abs(separation_on_cells(m14, kappa).sep / h14 - brute_separation_cells(mass14, kappa)) > 1e-9) {
                ++sep_mismatch;
            }
        }
        const auto m12 = measure_of(spec, 13, 3.0);
        const double h12 = m12.grid().spacing();
        const auto mass12 = cell_masses(m12);
        for (double kappa : {0.1, 0.3, 0.5}) {
            ++dobs_cases;
            if (std::abs(observable_diameter_on_cells(m12, kappa) / h12 - brute_dobs_cells(mass12, kappa)) > 1e-9) {
                ++dobs_mismatch;
            }
        }
    }
    return {chain && sep_mismatch == 0 && dobs_mismatch == 0,
            "chain " + std::string(chain ? "holds" : "violated") + " (max excess " + fmt(worst) +
                "); 14-cell separation mismatches " + std::to_string(sep_mismatch) + "/" + std::to_string(sep_cases) +
                "; 12-cell dobs mismatches " + std::to_string(dobs_mismatch) + "/" + std::to_string(dobs_cases)};
}

Verdict isoperimetry() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> pos(-3.0, 3.0), len(0.05, 1.5), radius(0.0, 2.0);
    double worst_ratio = INFINITY;
    int growth_fail = 0;
    for (const auto& spec : presets()) {
        const auto m = measure_of(spec);
        worst_ratio = std::min(worst_ratio, isoperimetric_check(m).min_profile_ratio);
        for (int t = 0; t < 30; ++t) {
            auto set = SetOnGrid::empty(m.grid());
            for (int k = 0; k < 1 + t % 3; ++k) {
                const double lo = pos(rng);
                set = set.unite(SetOnGrid::interval(m.grid(), lo, lo + len(rng)));
            }
            if (!neighborhood_growth_check(m, set, radius(rng)).holds) ++growth_fail;
        }
    }
    return {worst_ratio >= 1.0 - 1e-3 && growth_fail == 0,
            "min profile ratio " + fmt(worst_ratio) + ", growth failures " + std::to_string(growth_fail) + "/180"};
}

Verdict caffarelli() {
    const auto gauss = measure_of(PotentialSpec::gaussian());
    double worst = 0.0;
    for (const auto& spec : presets()) worst = std::max(worst, monotone_map(gauss, measure_of(spec)).max_slope);
    return {worst <= 1.0 + 1e-3, "max slope over presets " + fmt(worst)};
}

Verdict converse() {
    bool ok = true;
    std::string detail;
    auto sweep = [&](const std::string& name, const std::vector<PotentialSpec>& specs) {
        std::vector<double> r1, r2, r3, r4;
        for (const auto& spec : specs) {
            const auto c = converse_diagnostics(measure_of(spec), 0.3);
            r1.push_back(c.sup_phi_dev_core / std::pow(c.eta, 0.5));
            r2.push_back(c.sup_phi_dev_extended / std::pow(c.eta, 0.1));
            r3.push_back(c.var_deficit / std::pow(c.eta, 1.0 / 11.0));
            r4.push_back(c.gap_deficit / std::pow(c.eta, 1.0 / 22.0));
        }
        const double s[4] = {ratio_spread(r1), ratio_spread(r2), ratio_spread(r3), ratio_spread(r4)};
        for (double v : s) ok = ok && v <= 10.0;
        detail += (detail.empty() ? "" : "; ") + name + " max/min " + fmt(s[0]) + " " + fmt(s[1]) + " " + fmt(s[2]) +
                  " " + fmt(s[3]);
    };
    std::vector<PotentialSpec> scaled, cosine;
    for (double a : kScaledSweep) scaled.push_back(PotentialSpec::scaled_gaussian(a));
    for (double e : kEpsSweep) cosine.push_back(PotentialSpec::cosine_perturbed(e));
    sweep("scaled", scaled);
    sweep("cosine", cosine);
    return {ok, detail};
}

Verdict needle_suite() {
    const double theta = 0.02;
    const auto companion = measure_of(PotentialSpec::gaussian(), 201);
    double defect = 0.0;
    bool estimates = true;
    std::vector<double> eps, l2, h1, w1;
    for (double e : kEpsSweep) {
        const auto m = measure_of(PotentialSpec::cosine_perturbed(e));
        const auto p = product_measure({m, companion});
        const auto d = decompose(m, 2);
        const auto nf = disintegrate_axis(p, 0, d.f1());
        for (const auto& box : std::vector<std::vector<std::pair<double, double>>>{
                 {{0.0, kR}, {-kR, kR}}, {{-1.0, 0.5}, {-0.3, 2.0}}, {{-3.0, -2.0}, {1.0, 1.5}}}) {
            defect = std::max(defect, disintegration_check(p, nf, box).defect);
        }
        const auto est = needle_estimates_report(nf, d, 0.5);
        estimates = estimates && est.sandwich_holds && est.gradient_holds && est.mass_holds;
        const auto fg = fg_h1_report(nf, d, theta);
        eps.push_back(fg.epsilon);
        l2.push_back(fg.l2_dev);
        h1.push_back(fg.h1_dev);
        w1.push_back(fg.w1_g);
    }
    const auto m = measure_of(PotentialSpec::cosine_perturbed(0.1));
    const auto d = decompose(m, 2);
    const auto guiding = guiding_function_check(product_measure({m, companion}), 0, d.f1(), 200, 4242);
    const double sl2 = cli::loglog_slope(eps, l2), sh1 = cli::loglog_slope(eps, h1), sw1 = cli::loglog_slope(eps, w1);
    const bool ok = defect <= 1e-8 && estimates && guiding.holds && sl2 >= 0.1 - theta && sh1 >= 0.05 - theta &&
                    sw1 >= 0.05 - theta;
    return {ok, "disintegration defect " + fmt(defect) + ", estimates " + (estimates ? "hold" : "fail") +
                    ", guiding margin " + fmt(guiding.score_g - guiding.max_competitor_score) + " over " +
                    std::to_string(guiding.competitors) + " competitors, slopes l2 " + fmt(sl2) + " h1 " + fmt(sh1) +
                    " w1 " + fmt(sw1)};
}

Verdict infrastructure() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rcdlab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.ini") << "[grid]\nhalf_width = 10\npoints = 4001\n[potential]\npreset = cosine_perturbed\n"
                                      "epsilon = 0.1\n[command]\nseed = 17\n";
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    bool identical = true;
    for (const char* out : {"a", "b"}) {
        const auto o = cli::execute((dir / "run.ini").string(), "full-report", (dir / out).string(), std::nullopt, false);
        identical = identical && o.status == cli::kExitOk;
    }
    for (const char* ext : {".report", ".csv"}) {
        const std::string name = std::string("full-report_cosine_perturbed") + ext;
        identical = identical && slurp(dir / "a" / name) == slurp(dir / "b" / name) && !slurp(dir / "a" / name).empty();
    }
    double worst = 0.0;
    for (const auto& spec : presets()) {
        cli::ExperimentConfig c;
        c.potential = spec;
        c.resolution_check = true;
        worst = std::max(worst, cli::run_point(c, "spectrum").get("dlambda_max").value());
    }
    fs::remove_all(dir);
    return {identical && worst <= 1e-5, std::string("reports ") + (identical ? "byte-identical" : "differ") +
                                            ", max eigenvalue change n -> 2n " + fmt(worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"Gaussian spectrum", gaussian_spectrum},
        {"Lichnerowicz bound on random tables", lichnerowicz},
        {"Key Lemma", key_lemma},
        {"Hermite composition mechanism", hermite_mechanism},
        {"Stein W1 bound", stein_w1},
        {"perturbed eigenvalue oracle", perturbed_eigenvalue},
        {"observable-diameter chain and brute-force oracles", observable_chain},
        {"isoperimetry and neighbourhood growth", isoperimetry},
        {"Caffarelli contraction", caffarelli},
        {"converse ratios bounded across sweeps", converse},
        {"needle suite", needle_suite},
        {"infrastructure", infrastructure},
    };
    int unexpected = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - start;
        const bool documented = !v.pass && kDocumentedFailures.count(id) > 0;
        if (!v.pass && !documented) ++unexpected;
        std::printf("%-4s criterion %2d  %s: %s [%.1f s]%s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    v.detail.c_str(), secs.count(), documented ? " (documented deviation)" : "");
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}
