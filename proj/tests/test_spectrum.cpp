#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "rcdlab/errors.hpp"
#include "rcdlab/spectrum.hpp"

using namespace rcdlab;

namespace {

Measure1D measure_of(const PotentialSpec& spec, std::size_t n = 4001) {
    return normalize(make_potential(spec, build_grid(10.0, n)));
}

std::vector<double> sample(const Grid1D& g, double (*fn)(double)) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = fn(g.node(i));
    return v;
}

}  // namespace

TEST(TridiagonalTest, QlMatchesDenseSolver) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 5 + 7 * trial;
        SymTridiagonal t;
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            t.diag.push_back(u(rng));
            a(i, i) = t.diag.back();
            if (i + 1 < n) {
                t.off.push_back(u(rng));
                a(i, i + 1) = a(i + 1, i) = t.off.back();
            }
        }
        const auto ours = tridiagonal_eigenvalues(t);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(ours[i], es.eigenvalues()(i), 1e-12);
        const auto vecs = tridiagonal_eigenvectors(t, std::span<const double>(ours).first(3));
        for (std::size_t j = 0; j < 3; ++j) {
            const auto av = t.multiply(vecs[j]);
            for (int i = 0; i < n; ++i) EXPECT_NEAR(av[i], ours[j] * vecs[j][i], 1e-10);
        }
    }
}

TEST(TridiagonalTest, ShiftedSolveResidual) {
    SymTridiagonal t{{4.0, -1.0, 3.0, 0.5, 2.0}, {1.0, 2.0, -1.5, 0.7}};
    const std::vector<double> b{1.0, -2.0, 0.5, 3.0, -1.0};
    const double shift = 0.3;
    const auto x = tridiagonal_shifted_solve(t, shift, b);
    auto tx = t.multiply(x);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(tx[i] - shift * x[i], b[i], 1e-13);
}

TEST(DirichletTest, KernelAndSymmetry) {
    const auto op = assemble_dirichlet(measure_of(PotentialSpec::cosine_perturbed(0.1), 801));
    const std::vector<double> one(op.size(), 1.0);
    EXPECT_EQ(op.form(one, one), 0.0);
    for (double s : op.stiffness(one)) EXPECT_EQ(s, 0.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> u(op.size()), v(op.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = nd(rng);
        v[i] = nd(rng);
    }
    EXPECT_EQ(op.form(u, v), op.form(v, u));
}

TEST(DirichletTest, LinearFunctionHasUnitEnergy) {
    const auto op = assemble_dirichlet(measure_of(PotentialSpec::gaussian()));
    const auto x = sample(op.grid(), [](double t) { return t; });
    EXPECT_NEAR(op.form(x, x), 1.0, 1e-6);
}

TEST(SpectrumTest, GaussianEigenvalues) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::gaussian())), 6);
    for (std::size_t j = 0; j < 6; ++j) {
        EXPECT_NEAR(d.eigenvalues[j], static_cast<double>(j), 1e-4);
        EXPECT_LT(d.convergence[j], 1e-5);
    }
    EXPECT_NEAR(d.eigenvalues[0], 0.0, 1e-10);
    for (double f : d.eigenfunctions[0].values) EXPECT_NEAR(f, 1.0, 1e-8);
    EXPECT_LE(d.orthonormality_residual, 1e-8);
}

TEST(SpectrumTest, ScaledGaussianEigenvalues) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::scaled_gaussian(0.2))), 3);
    EXPECT_NEAR(d.eigenvalues[0], 0.0, 1e-4);
    EXPECT_NEAR(d.eigenvalues[1], 1.2, 1e-4);
    EXPECT_NEAR(d.eigenvalues[2], 2.4, 1e-4);
}

TEST(SpectrumTest, CosineAgreesWithDoubledResolution) {
    const auto coarse = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::cosine_perturbed(0.1))), 2);
    const auto fine =
        eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::cosine_perturbed(0.1), 8001)), 2, false);
    EXPECT_LE(std::abs(coarse.lambda1() - fine.lambda1()), 1e-5);
}

TEST(SpectrumTest, RayleighConsistencyAndMeanZero) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::cosine_perturbed(0.3), 2001)), 5);
    const Measure1D& m = d.op.measure();
    for (std::size_t j = 0; j < d.count(); ++j) {
        const auto& f = d.eigenfunctions[j].values;
        const double n2 = lp_norm(f, 2.0, m);
        EXPECT_LE(std::abs(d.op.form(f, f) - d.eigenvalues[j] * n2 * n2), 1e-8);
        EXPECT_GE(f.back(), 0.0);
        if (j >= 1) EXPECT_NEAR(m.integrate(f), 0.0, 1e-10);
    }
}

TEST(SpectrumTest, RejectsBadCount) {
    const auto op = assemble_dirichlet(measure_of(PotentialSpec::gaussian(), 41));
    EXPECT_THROW(eigenpairs(op, 0), InvalidArgument);
    EXPECT_THROW(eigenpairs(op, 11), InvalidArgument);
}

TEST(SpectrumTest, LichnerowiczOnRandomTables) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> amp(0.0, 0.4), freq(0.2, 1.5), phase(0.0, 6.283);
    const auto g = build_grid(10.0, 1001);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = amp(rng), w = freq(rng), ph = phase(rng);
        // x^2/2 + a (w^2 x^2/2 + cos(w x + ph)) / w^2 keeps psi'' >= 1.
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.node(i);
            v[i] = 0.5 * x * x + a * (0.5 * w * w * x * x + std::cos(w * x + ph)) / (w * w);
        }
        const auto d = eigenpairs(assemble_dirichlet(normalize(make_potential(PotentialSpec::from_table(v), g))), 2);
        EXPECT_GE(d.lambda1(), 1.0 - 1e-6);
    }
}

TEST(LpNormTest, Examples) {
    const auto m = measure_of(PotentialSpec::gaussian());
    const std::vector<double> one(m.size(), 1.0);
    for (double p : {1.0, 2.0, 3.5}) EXPECT_NEAR(lp_norm(one, p, m), 1.0, 1e-12);
    const auto x = sample(m.grid(), [](double t) { return t; });
    EXPECT_NEAR(lp_norm(x, 2.0, m), 1.0, 1e-6);
    EXPECT_NEAR(lp_norm(x, 4.0, m), std::pow(3.0, 0.25), 1e-4);
    EXPECT_THROW(lp_norm(x, 0.5, m), InvalidArgument);
}

TEST(KeyLemmaTest, EqualityCases) {
    const auto g = key_lemma_report(eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::gaussian())), 2), 1.0);
    EXPECT_NEAR(g.lhs, 0.0, 1e-6);
    EXPECT_NEAR(*g.rhs, 0.0, 1e-5);
    const auto s = key_lemma_report(
        eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::scaled_gaussian(0.2))), 2), 1.0);
    EXPECT_NEAR(s.lhs, 0.0, 1e-6);
    EXPECT_NEAR(*s.rhs, 2.9702, 1e-3);
}

TEST(KeyLemmaTest, BoundArithmetic) {
    // 4 sqrt(0.2) sqrt(1.2) 2^{0.6}
    EXPECT_NEAR(key_lemma_bound(1.2, 1.0), 2.970193, 1e-5);
    EXPECT_EQ(key_lemma_bound(1.0, 1.5), 0.0);
    EXPECT_THROW(key_lemma_bound(1.2, 2.0), InvalidArgument);
}

TEST(KeyLemmaTest, CosineInequality) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::cosine_perturbed(0.1))), 2);
    const auto r = key_lemma_report(d, 1.5);
    EXPECT_TRUE(r.holds());
    EXPECT_GT(r.lhs, 0.0);
    const auto high = key_lemma_report(d, 2.0);
    EXPECT_FALSE(high.rhs.has_value());
    EXPECT_THROW(key_lemma_report(d, 0.5), InvalidArgument);
}

TEST(IntegrabilityTest, Examples) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::gaussian())), 2);
    const auto r4 = integrability_report(d, 4.0);
    EXPECT_NEAR(r4.f_norm, std::pow(3.0, 0.25), 1e-4);
    EXPECT_LE(r4.f_norm, *r4.f_bound);
    EXPECT_NEAR(*r4.f_bound, std::sqrt(3.0), 1e-4);
    const auto r2 = integrability_report(d, 2.0);
    EXPECT_NEAR(r2.f_norm, 1.0, 1e-9);
    const auto s = integrability_report(
        eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::scaled_gaussian(0.2))), 2), 2.0);
    EXPECT_NEAR(s.grad_norm, std::sqrt(1.2), 1e-6);
    EXPECT_NEAR(s.grad_bound, std::pow(6.0, 1.2), 1e-3);
    EXPECT_FALSE(integrability_report(d, 1.0).f_bound.has_value());
}

TEST(BochnerTest, GaussianCases) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::gaussian())), 3);
    const auto r1 = bochner_gamma2_report(d, 1);
    EXPECT_LE(r1.pointwise_violation_max, 1e-3);
    EXPECT_NEAR(r1.integrated_gamma2, 1.0, 1e-4);
    const auto r2 = bochner_gamma2_report(d, 2);
    EXPECT_NEAR(r2.integrated_gamma2, 4.0, 1e-3);
    EXPECT_NEAR(r2.lambda_sq, 4.0, 1e-3);
}

TEST(BochnerTest, CosineCase) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::cosine_perturbed(0.1))), 2);
    const auto r = bochner_gamma2_report(d);
    EXPECT_LE(r.pointwise_violation_max, 1e-3);
    EXPECT_FALSE(r.discretization_warning);
}

// ||f - int f||_p <= 2p || |grad f| ||_p on random smooth functions.
TEST(PoincareTest, LpPoincareOnRandomFunctions) {
    const auto op = assemble_dirichlet(measure_of(PotentialSpec::cosine_perturbed(0.2), 2001));
    const Measure1D& m = op.measure();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), freq(0.1, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> f(op.size(), 0.0);
        for (int term = 0; term < 4; ++term) {
            const double c = coef(rng), w = freq(rng), ph = 3.0 * coef(rng);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += c * std::sin(w * op.grid().node(i) + ph);
        }
        const double mean = m.integrate(f);
        for (double& v : f) v -= mean;
        auto grad = op.carre_du_champ(f);
        for (double& g : grad) g = std::sqrt(g);
        for (double p : {1.0, 2.0, 3.0}) EXPECT_LE(lp_norm(f, p, m), 2.0 * p * lp_norm(grad, p, m));
    }
}

TEST(ExportTest, RoundTrip) {
    const auto d = eigenpairs(assemble_dirichlet(measure_of(PotentialSpec::gaussian(), 101)), 3, false);
    const auto back = import_decomposition(export_decomposition(d));
    ASSERT_EQ(back.eigenvalues.size(), 3u);
    ASSERT_EQ(back.nodes.size(), 101u);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(back.eigenvalues[j], d.eigenvalues[j]);
        for (std::size_t i = 0; i < 101; ++i) EXPECT_EQ(back.eigenfunctions[j][i], d.eigenfunctions[j][i]);
    }
    EXPECT_THROW(import_decomposition("0 1 2\n"), InvalidArgument);
}
