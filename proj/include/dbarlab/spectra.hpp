#pragma once

#include <vector>

#include "dbarlab/operators.hpp"

namespace dbarlab {

struct EigenResult {
    VecR lambdas;               // ascending
    Eigen::MatrixXcd vectors;   // n x k, orthonormal under integrate()
    VecR residuals;             // ||Hv - lambda v|| / ||v||
    int iterations = 0;
    std::vector<bool> converged;

    bool all_converged() const {
        for (bool c : converged)
            if (!c) return false;
        return !converged.empty();
    }
};

struct InverseResult {
    VecC x;
    int iterations = 0;
    double residual = 0;
};

// Conjugate gradients for the Hermitian PSD contract; relative residual
// ||Hx - g|| / ||g|| <= tol on success, convergence_error past max_iter.
InverseResult apply_inverse(const SparseHermitianOp& H, const VecC& g,
                            double tol, int max_iter = 10000);

// k smallest eigenpairs by shift-invert Lanczos at shift 0 with full
// reorthogonalization, Krylov dimension 4k, restart cap 5 (thick restarts:
// unresolved bottom Ritz vectors seed the next sweep); inner solves use a
// sparse LDLT factorization of H.  Systems up to a few hundred unknowns go
// through a dense eigensolve instead.  Residuals are re-verified post hoc by
// explicit multiplication.  An optional start vector warm-starts the first
// Krylov space; certification is unaffected.
EigenResult smallest_eigs(const SparseHermitianOp& H, int k, double tol,
                          std::uint64_t seed = 0, const VecC* start = nullptr);

// Matrix-level entry point used for restrictions of an assembled operator
// (ball subproblems); h fixes the integrate() normalization of the vectors.
EigenResult smallest_eigs_matrix(const SpMatC& H, double h, int k, double tol,
                                 std::uint64_t seed = 0, const VecC* start = nullptr);

struct ClusterCount {
    int count = 0;
    bool saturated = false;  // count equals the number of computed pairs
};

ClusterCount cluster_count(const EigenResult& e, double center, double halfwidth);

struct SingularValues {
    VecR sigmas;         // descending, sigma_j = lambda_j^{-1/2}
    VecR trace_partial;  // partial sums of sigma^2 (trace diagnostic)
};

SingularValues solution_singular_values(const EigenResult& e);

}  // namespace dbarlab
