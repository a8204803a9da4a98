#include "dbarlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace dbarlab {

InverseResult apply_inverse(const SparseHermitianOp& H, const VecC& g,
                            double tol, int max_iter) {
    if (!(tol > 0)) throw config_error("apply_inverse: tol must be positive");
    if (g.size() != H.H.rows()) throw usage_error("apply_inverse: size mismatch");
    InverseResult out;
    out.x = VecC::Zero(g.size());
    const double gnorm = g.norm();
    if (gnorm == 0.0) return out;

    VecC r = g;
    VecC p = r;
    VecC q(g.size());
    double rr = r.squaredNorm();
    for (int it = 0; it < max_iter; ++it) {
        q.noalias() = H.H * p;
        const double pq = std::real(p.dot(q));
        if (!(pq > 0))
            throw consistency_error("apply_inverse: operator lost positive definiteness");
        const double alpha = rr / pq;
        out.x += alpha * p;
        r -= alpha * q;
        const double rr2 = r.squaredNorm();
        out.iterations = it + 1;
        out.residual = std::sqrt(rr2) / gnorm;
        if (out.residual <= tol) return out;
        p = r + (rr2 / rr) * p;
        rr = rr2;
    }
    throw convergence_error("apply_inverse: CG hit the iteration cap with residual " +
                                std::to_string(out.residual),
                            out.residual);
}

namespace {

EigenResult dense_smallest(const SpMatC& H, double h, int k) {
    Eigen::MatrixXcd Hd(H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hd);
    if (es.info() != Eigen::Success)
        throw consistency_error("dense eigensolver failed");
    EigenResult r;
    const Eigen::Index n = H.rows();
    r.lambdas = es.eigenvalues().head(k);
    r.vectors.resize(n, k);
    r.residuals.resize(k);
    r.converged.assign(static_cast<size_t>(k), true);
    for (int j = 0; j < k; ++j) {
        VecC v = es.eigenvectors().col(j);
        r.residuals[j] = (H * v - r.lambdas[j] * v).norm() / v.norm();
        r.vectors.col(j) = v / (h * v.norm());
    }
    return r;
}

struct Locked {
    std::vector<double> lambdas;
    std::vector<VecC> vectors;  // Euclidean-orthonormal
};

void project_out(VecC& w, const Locked& locked) {
    for (const auto& u : locked.vectors) w -= u.dot(w) * u;
}

VecC random_start(Eigen::Index n, std::mt19937_64& rng, const Locked& locked) {
    std::normal_distribution<double> N(0.0, 1.0);
    VecC v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cdouble(N(rng), N(rng));
    project_out(v, locked);
    const double nv = v.norm();
    if (nv < 1e-14) throw consistency_error("smallest_eigs: degenerate start vector");
    return v / nv;
}

}  // namespace

EigenResult smallest_eigs_matrix(const SpMatC& H, double h, int k, double tol,
                                 std::uint64_t seed, const VecC* start) {
    const Eigen::Index n = H.rows();
    if (k < 1 || 4 * static_cast<Eigen::Index>(k) > n)
        throw config_error("smallest_eigs: need 1 <= k <= n/4 (n=" + std::to_string(n) +
                           ", k=" + std::to_string(k) + ")");
    if (!(tol > 0)) throw config_error("smallest_eigs: tol must be positive");
    if (n <= 600) return dense_smallest(H, h, k);

    Eigen::SimplicialLDLT<SpMatC, Eigen::Lower> ldlt;
    ldlt.compute(H);
    if (ldlt.info() != Eigen::Success)
        throw consistency_error("smallest_eigs: LDLT factorization failed (operator not PSD?)");

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    // Krylov dimension 4k, floored so that small-k requests still build a
    // subspace deep enough to resolve the interior of degenerate clusters.
    const int m = static_cast<int>(std::min<Eigen::Index>(std::max(4 * k, 100), n - 1));
    const int restart_cap = 5;

    Locked locked;
    int total_steps = 0;
    // thick restart: the best unconverged Ritz vectors seed the next sweep,
    // so cluster interiors keep refining instead of starting over
    Eigen::MatrixXcd kept(n, 0);

    // A sweep may certify a pair above a still-unresolved lower one; sweeps
    // continue until no unconverged Ritz value undercuts the k-th locked.
    auto kth_locked = [&]() {
        if (static_cast<int>(locked.lambdas.size()) < k)
            return std::numeric_limits<double>::infinity();
        std::vector<double> tmp = locked.lambdas;
        std::nth_element(tmp.begin(), tmp.begin() + (k - 1), tmp.end());
        return tmp[static_cast<size_t>(k - 1)];
    };
    bool unresolved_below = true;

    for (int sweep = 0;
         sweep < restart_cap && (static_cast<int>(locked.lambdas.size()) < k || unresolved_below);
         ++sweep) {
        Eigen::MatrixXcd V(n, m + 1);
        // projected operator S = V^H (H^{-1}) V, Hermitian by construction;
        // with full reorthogonalization the exact column coefficients are the
        // same projections used to orthogonalize, so S costs nothing extra
        Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(m + 1, m + 1);

        const int nseed = static_cast<int>(kept.cols());
        for (int c = 0; c < nseed; ++c) V.col(c) = kept.col(c);
        if (sweep == 0 && start && start->size() == n && start->norm() > 0) {
            VecC v0 = *start;
            project_out(v0, locked);
            const double nv = v0.norm();
            V.col(nseed) = nv > 1e-12 ? VecC(v0 / nv) : random_start(n, rng, locked);
        } else {
            V.col(nseed) = random_start(n, rng, locked);
        }
        int cols = nseed + 1;  // orthonormal basis columns present
        int steps = 0;
        for (int j = 0; j < m && j < cols; ++j) {
            VecC w = ldlt.solve(V.col(j));
            project_out(w, locked);
            const double before = w.norm();
            VecC coef = V.leftCols(cols).adjoint() * w;
            w -= V.leftCols(cols) * coef;
            if (w.norm() < 0.7071 * before) {
                // refinement pass when cancellation ate the projection
                const VecC coef2 = V.leftCols(cols).adjoint() * w;
                w -= V.leftCols(cols) * coef2;
                coef += coef2;
            }
            project_out(w, locked);
            S.col(j).head(cols) = coef;
            S.row(j).head(cols) = coef.adjoint();
            const double beta = w.norm();
            ++steps;
            if (cols < m + 1) {
                if (beta > 1e-12) {
                    V.col(cols) = w / beta;
                    S(cols, j) = beta;
                    S(j, cols) = beta;
                    ++cols;
                } else if (j + 1 >= cols) {
                    // direction exhausted: continue the basis from a fresh one
                    VecC r = random_start(n, rng, locked);
                    r -= V.leftCols(cols) * (V.leftCols(cols).adjoint() * r);
                    r -= V.leftCols(cols) * (V.leftCols(cols).adjoint() * r);
                    const double nr = r.norm();
                    if (nr < 1e-10) break;
                    V.col(cols) = r / nr;
                    ++cols;
                }
            }
        }
        total_steps += steps;
        if (steps == 0) break;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> te(S.topLeftCorner(steps, steps));
        // Ritz values of H^{-1}, largest first -> smallest eigenvalues of H.
        // Locking favors the smallest lambdas; extraction always scans the
        // whole spectrum so later sweeps keep refining unresolved clusters.
        unresolved_below = false;
        std::vector<std::pair<double, VecC>> misses;  // unconverged, lambda ascending
        const int miss_cap = std::max(m / 2, 8);
        const int lock_cap = 4 * k;
        const int scan_limit = std::min(steps, lock_cap + miss_cap);
        int scanned = 0;
        for (int idx = steps - 1; idx >= 0 && scanned < scan_limit; --idx, ++scanned) {
            const bool lock_full = static_cast<int>(locked.lambdas.size()) >= lock_cap;
            const bool miss_full = static_cast<int>(misses.size()) >= miss_cap;
            if (lock_full && miss_full) break;
            const double theta = te.eigenvalues()[idx];
            if (theta <= 0) continue;
            VecC x = V.leftCols(steps) * te.eigenvectors().col(idx);
            project_out(x, locked);
            const double nx = x.norm();
            if (nx < 1e-8) continue;  // duplicate of a locked pair
            x /= nx;
            const double lam = 1.0 / theta;
            const double res = (H * x - lam * x).norm();
            if (res <= tol * std::max(std::abs(lam), 1e-300)) {
                if (!lock_full) {
                    locked.lambdas.push_back(lam);
                    locked.vectors.push_back(x);
                }
            } else if (!miss_full) {
                misses.emplace_back(lam, std::move(x));
            }
        }
        const double kth = kth_locked();
        for (auto& [lam, x] : misses)
            if (lam < kth) unresolved_below = true;
        // seed the next sweep with the lowest unresolved directions
        const int nkeep = static_cast<int>(
            std::min<size_t>(misses.size(), static_cast<size_t>(std::max(m / 2, 8))));
        kept.resize(n, nkeep);
        for (int c = 0; c < nkeep; ++c) kept.col(c) = misses[static_cast<size_t>(c)].second;
        // re-orthonormalize the seed block against itself and the locked set
        for (int c = 0; c < nkeep; ++c) {
            VecC v = kept.col(c);
            project_out(v, locked);
            for (int b = 0; b < c; ++b) v -= kept.col(b).dot(v) * kept.col(b);
            for (int b = 0; b < c; ++b) v -= kept.col(b).dot(v) * kept.col(b);
            const double nv = v.norm();
            if (nv < 1e-10) {
                kept.col(c).setZero();
            } else {
                kept.col(c) = v / nv;
            }
        }
        // drop zeroed columns
        int wcol = 0;
        for (int c = 0; c < nkeep; ++c)
            if (kept.col(c).norm() > 0.5) kept.col(wcol++) = kept.col(c);
        kept.conservativeResize(n, wcol);
    }

    // assemble the k smallest locked pairs (partial if convergence fell short)
    std::vector<int> order(locked.lambdas.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked.lambdas[static_cast<size_t>(a)] < locked.lambdas[static_cast<size_t>(b)]; });
    const int found = std::min<int>(k, static_cast<int>(order.size()));

    EigenResult r;
    r.iterations = total_steps;
    r.lambdas.resize(found);
    r.vectors.resize(n, found);
    r.residuals.resize(found);
    r.converged.assign(static_cast<size_t>(found), false);
    for (int j = 0; j < found; ++j) {
        const VecC& v = locked.vectors[static_cast<size_t>(order[static_cast<size_t>(j)])];
        const double lam = locked.lambdas[static_cast<size_t>(order[static_cast<size_t>(j)])];
        r.lambdas[j] = lam;
        r.residuals[j] = (H * v - lam * v).norm() / v.norm();
        r.converged[static_cast<size_t>(j)] = r.residuals[j] <= tol * std::max(std::abs(lam), 1e-300);
        r.vectors.col(j) = v / (h * v.norm());
    }
    if (found < k) {
        // flag the shortfall without discarding what converged
        r.converged.resize(static_cast<size_t>(found), false);
    }
    return r;
}

EigenResult smallest_eigs(const SparseHermitianOp& H, int k, double tol, std::uint64_t seed,
                          const VecC* start) {
    return smallest_eigs_matrix(H.H, H.grid->h, k, tol, seed, start);
}

ClusterCount cluster_count(const EigenResult& e, double center, double halfwidth) {
    ClusterCount c;
    for (Eigen::Index i = 0; i < e.lambdas.size(); ++i) {
        if (!e.converged[static_cast<size_t>(i)]) continue;
        if (std::abs(e.lambdas[i] - center) <= halfwidth) ++c.count;
    }
    c.saturated = (c.count == static_cast<int>(e.lambdas.size()));
    return c;
}

SingularValues solution_singular_values(const EigenResult& e) {
    SingularValues s;
    const Eigen::Index k = e.lambdas.size();
    s.sigmas.resize(k);
    s.trace_partial.resize(k);
    double acc = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(e.lambdas[j] > 0))
            throw consistency_error("solution_singular_values: non-positive eigenvalue");
        s.sigmas[j] = 1.0 / std::sqrt(e.lambdas[j]);
        acc += 1.0 / e.lambdas[j];
        s.trace_partial[j] = acc;
    }
    return s;
}

}  // namespace dbarlab
