#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dbarlab/dbar_solver.hpp"

using namespace dbarlab;

namespace {

struct Setup {
    GridPtr grid;
    SparseHermitianOp H;
};

Setup fock_setup(double R, double h) {
    Setup s;
    s.grid = build_grid(R, h, GridShape::square);
    s.H = assemble_H(s.grid, WeightModel::monomial(2));
    return s;
}

VecC random_vec(Eigen::Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    VecC v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cdouble(N(rng), N(rng));
    return v;
}

}  // namespace

TEST_CASE("canonical solve of f = 1 on a compact grid") {
    // same pipeline as the acceptance run, at a cheaper operating point
    const auto s = fock_setup(4.0, 0.1);
    const FieldC f = sample(s.grid, [](cdouble) { return cdouble(1, 0); });
    const auto rep = canonical_solve(s.H, f, 1e-10);
    CHECK(rep.residual_rel <= 1e-10);
    // u tracks zbar in the bulk
    double worst = 0;
    for (Eigen::Index k = 0; k < s.grid->n; ++k) {
        const cdouble z = s.grid->point(k);
        if (std::abs(z) > 2.0) continue;
        worst = std::max(worst, std::abs(rep.u.values[k] - std::conj(z)));
    }
    CHECK(worst / 2.0 < 0.05);
    // truncated weighted norm approaches pi/4 (analytic Gaussian integral)
    CHECK(rep.weighted_norm * rep.weighted_norm == doctest::Approx(M_PI / 4).epsilon(0.02));
    CHECK(rep.ortho_defect <= 1e-10);  // exact lattice cancellation for m = 2
    CHECK(rep.truncation_tail < 1e-10);
}

TEST_CASE("canonical solve of f = 0") {
    const auto s = fock_setup(2.0, 0.2);
    const FieldC f(s.grid, VecC::Zero(s.grid->n));
    const auto rep = canonical_solve(s.H, f, 1e-10);
    CHECK(rep.u.values.norm() == 0.0);
    CHECK(rep.residual_rel == 0.0);
    CHECK(rep.weighted_norm == 0.0);
    CHECK(rep.ortho_defect == 0.0);
    CHECK(rep.cg_iterations == 0);
}

TEST_CASE("overflow guard names the offending radius") {
    auto grid = build_grid(30.0, 1.0, GridShape::square);
    const auto H = assemble_H(grid, WeightModel::monomial(2));  // phi up to ~1700
    const FieldC f = sample(grid, [](cdouble) { return cdouble(1, 0); });
    CHECK_THROWS_WITH_AS(canonical_solve(H, f, 1e-8),
                         doctest::Contains("|z|="), domain_error);
}

TEST_CASE("gauge round trip: v equals u e^{-phi} exactly") {
    const auto s = fock_setup(3.0, 0.2);
    const FieldC f = sample(s.grid, [](cdouble z) { return std::exp(-std::norm(z)); });
    const auto rep = canonical_solve(s.H, f, 1e-10);
    for (Eigen::Index k = 0; k < s.grid->n; ++k) {
        const double phi = std::norm(s.grid->point(k));
        CHECK(std::abs(rep.v.values[k] - rep.u.values[k] * std::exp(-phi)) <=
              1e-13 * std::abs(rep.v.values[k]) + 1e-300);
    }
}

TEST_CASE("T identity and boundedness surrogate") {
    const auto s = fock_setup(3.0, 0.125);
    const double tol = 1e-11;
    const auto eig = smallest_eigs(s.H, 1, 1e-9, 0);
    const double sigma1 = 1.0 / std::sqrt(eig.lambdas[0]);
    for (unsigned t = 0; t < 8; ++t) {
        const VecC gvec = random_vec(s.grid->n, 700 + t);
        const auto inv = apply_inverse(s.H, gvec, tol);
        const VecC Tg = s.H.factor->apply(inv.x);
        const double lhs = Tg.squaredNorm();
        const double rhs = std::real(gvec.dot(inv.x));
        CHECK(std::abs(lhs - rhs) <= 10 * tol * gvec.squaredNorm());
        CHECK(Tg.norm() <= sigma1 * gvec.norm() * (1 + 10 * tol));
        // residual identity: Dbar(Tg) = g up to the linear-solver error
        const SpMatC Db = assemble_Dbar(*s.H.factor);
        CHECK((Db * Tg - gvec).norm() / gvec.norm() <= 10 * tol);
    }
}

TEST_CASE("orthogonality defect conventions") {
    const auto s = fock_setup(3.0, 0.2);
    const auto w = WeightModel::monomial(2);

    const FieldC zero(s.grid, VecC::Zero(s.grid->n));
    CHECK(orthogonality_defect(s.grid, w, zero, 5) == 0.0);

    // the constant 1 lies in the weighted holomorphic space: defect ~ 1
    const FieldC one = sample(s.grid, [](cdouble) { return cdouble(1, 0); });
    CHECK(orthogonality_defect(s.grid, w, one, 0) == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(orthogonality_defect(s.grid, w, one, -1), config_error);
}

TEST_CASE("K too large for a steep tabulated weight") {
    auto grid = build_grid(1.0, 0.1, GridShape::square);
    const int n = 41;
    std::vector<double> tab(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = -2.0 + i * 0.1, y = -2.0 + j * 0.1;
            tab[static_cast<size_t>(j) * n + i] = 3000.0 * (x * x + y * y);
        }
    const auto w = WeightModel::tabulated(-2.0, -2.0, 0.1, n, n, tab);
    const FieldC one = sample(grid, [](cdouble) { return cdouble(1, 0); });
    // e^{-3000 r^2} floors ||z^k||_phi near k ~ 140, well before K
    CHECK_THROWS_AS(orthogonality_defect(grid, w, one, 300), domain_error);
}

TEST_CASE("minimality probe accepts the canonical solution") {
    const auto s = fock_setup(4.0, 0.1);
    const FieldC f = sample(s.grid, [](cdouble) { return cdouble(1, 0); });
    const auto rep = canonical_solve(s.H, f, 1e-10);
    const double probe = minimality_probe(s.grid, WeightModel::monomial(2), rep, 100, 0);
    CHECK(probe >= -1e-6);
}

TEST_CASE("minimality probe rejects a contaminated solution") {
    const auto s = fock_setup(4.0, 0.1);
    const FieldC f = sample(s.grid, [](cdouble) { return cdouble(1, 0); });
    auto rep = canonical_solve(s.H, f, 1e-10);
    // contaminate with the holomorphic element 1: p = -1 now reduces the norm
    rep.u.values.array() += 1.0;
    for (Eigen::Index k = 0; k < s.grid->n; ++k)
        rep.v.values[k] = rep.u.values[k] * std::exp(-std::norm(s.grid->point(k)));
    const double probe = minimality_probe(s.grid, WeightModel::monomial(2), rep, 100, 0);
    CHECK(probe < 0.0);
}

TEST_CASE("minimality probe with no trials returns the sentinel") {
    const auto s = fock_setup(2.0, 0.2);
    const FieldC f = sample(s.grid, [](cdouble) { return cdouble(1, 0); });
    const auto rep = canonical_solve(s.H, f, 1e-9);
    CHECK(std::isinf(minimality_probe(s.grid, WeightModel::monomial(2), rep, 0, 0)));
}
