#include "dbarlab/dbar_solver.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace dbarlab {

namespace {

// Tail mass of e^{-2 phi} outside radius R, for the truncation disclosure.
double weight_tail_mass(const WeightModel& w, double R) {
    if (w.kind() != WeightModel::Kind::monomial) return 0.0;  // table ends at the grid
    const double m = w.exponent();
    // 2 pi int_R^inf e^{-2 r^m} r dr by Simpson on a decaying integrand
    const double upper = std::pow(350.0, 1.0 / m);  // e^{-2 r^m} underflows past here
    if (upper <= R) return 0.0;
    const int N = 2000;
    const double dr = (upper - R) / N;
    double s = 0;
    for (int i = 0; i <= N; ++i) {
        const double r = R + i * dr;
        const double f = std::exp(-2.0 * std::pow(r, m)) * r;
        s += f * ((i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    return 2.0 * M_PI * s * dr / 3.0;
}

}  // namespace

SolveReport canonical_solve(const SparseHermitianOp& H, const FieldC& f,
                            double tol, int max_iter, int ortho_K) {
    if (!H.factor)
        throw usage_error("canonical_solve needs the factored operator (assemble_H)");
    const GridPtr& grid = H.grid;
    if (f.grid.get() != grid.get())
        throw usage_error("canonical_solve: field on a different grid");
    const Grid2D& g = *grid;
    const WeightModel& w = H.weight;

    // overflow guard: e^{+phi} must stay representable
    double phimax = 0;
    cdouble zbad = 0;
    for (Eigen::Index k = 0; k < g.n; ++k) {
        const double p = w.eval(g.point(k));
        if (p > phimax) { phimax = p; zbad = g.point(k); }
    }
    if (phimax > 700.0)
        throw domain_error("canonical_solve: e^{phi} overflows at |z|=" +
                           std::to_string(std::abs(zbad)) + " (phi=" + std::to_string(phimax) +
                           "); shrink grid.R");

    VecC phi(g.n);
    for (Eigen::Index k = 0; k < g.n; ++k) phi[k] = w.eval(g.point(k));

    SolveReport rep;
    rep.ortho_K = ortho_K;
    rep.truncation_tail = weight_tail_mass(w, g.R);

    VecC gv(g.n);
    for (Eigen::Index k = 0; k < g.n; ++k) gv[k] = f.values[k] * std::exp(-phi[k].real());

    if (gv.norm() == 0.0) {
        rep.u = FieldC(grid, VecC::Zero(g.n));
        rep.v = FieldC(grid, VecC::Zero(g.n));
        return rep;
    }

    InverseResult inv = apply_inverse(H, gv, tol, max_iter);
    rep.cg_iterations = inv.iterations;
    rep.residual_rel = inv.residual;  // == ||Dbar_h v - g||/||g|| since H = Dbar_h D_h

    const VecC v_image = H.factor->apply(inv.x);
    VecC v = H.factor->interior_part(v_image);
    VecC u(g.n);
    for (Eigen::Index k = 0; k < g.n; ++k) u[k] = v[k] * std::exp(phi[k].real());

    rep.v = FieldC(grid, std::move(v));
    rep.u = FieldC(grid, std::move(u));
    rep.weighted_norm = norm_l2(g, rep.v.values);  // ||u||_phi == ||v||
    rep.ortho_defect = orthogonality_defect(grid, w, rep.u, ortho_K);
    return rep;
}

double orthogonality_defect(const GridPtr& grid, const WeightModel& w,
                            const FieldC& u, int K) {
    if (K < 0) throw config_error("orthogonality_defect: K must be >= 0");
    if (u.grid.get() != grid.get())
        throw usage_error("orthogonality_defect: field on a different grid");
    const Grid2D& g = *grid;

    VecC expm(g.n);  // e^{-phi}
    for (Eigen::Index k = 0; k < g.n; ++k) expm[k] = std::exp(-w.eval(g.point(k)));

    // u e^{-phi} once; every monomial pairing then stays in the stable gauge
    VecC ue(g.n);
    for (Eigen::Index k = 0; k < g.n; ++k) ue[k] = u.values[k] * expm[k];
    const double unorm = g.h * ue.norm();
    if (unorm == 0.0) return 0.0;

    VecC zk = VecC::Ones(g.n);
    double worst = 0;
    for (int k = 0; k <= K; ++k) {
        if (k > 0)
            for (Eigen::Index j = 0; j < g.n; ++j) zk[j] *= g.point(j);
        VecC zke(g.n);
        for (Eigen::Index j = 0; j < g.n; ++j) zke[j] = zk[j] * expm[j];
        const double znorm = g.h * zke.norm();
        if (znorm < 1e-140)  // squares of smaller norms denormalize
            throw domain_error("orthogonality_defect: ||z^" + std::to_string(k) +
                               "||_phi below the machine floor; reduce K");
        const cdouble num = g.h * g.h * zke.dot(ue);
        worst = std::max(worst, std::abs(num) / (unorm * znorm));
    }
    return worst;
}

double minimality_probe(const GridPtr& grid, const WeightModel& w,
                        const SolveReport& report, int trials, std::uint64_t seed) {
    if (trials <= 0) return std::numeric_limits<double>::infinity();
    const Grid2D& g = *grid;
    if (report.v.grid.get() != grid.get())
        throw usage_error("minimality_probe: report belongs to a different grid");

    VecC expm(g.n);
    for (Eigen::Index k = 0; k < g.n; ++k) expm[k] = std::exp(-w.eval(g.point(k)));

    const double base = norm_l2(g, report.v.values);
    std::mt19937_64 rng(seed ^ 0x7b4a1ce5u);
    std::normal_distribution<double> N(0.0, 1.0);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    double worst = std::numeric_limits<double>::infinity();
    VecC pert(g.n);
    for (int t = 0; t < trials; ++t) {
        const double scale = std::exp(std::log(1e-2) + U(rng) * std::log(2.0 / 1e-2));
        cdouble coef[6];
        for (auto& c : coef) c = scale * cdouble(N(rng), N(rng)) / std::sqrt(2.0);
        for (Eigen::Index j = 0; j < g.n; ++j) {
            const cdouble z = g.point(j);
            cdouble p = coef[5];
            for (int d = 4; d >= 0; --d) p = p * z + coef[d];
            pert[j] = report.v.values[j] + p * expm[j];  // (u + p) e^{-phi}
        }
        worst = std::min(worst, norm_l2(g, pert) - base);
    }
    return worst;
}

}  // namespace dbarlab
