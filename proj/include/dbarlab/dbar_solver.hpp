#pragma once

#include "dbarlab/spectra.hpp"

namespace dbarlab {

// Canonical solve certificates.  All certified quantities are computed in the
// unweighted gauge (v = u e^{-phi}), where the discrete identities are exact;
// e^{+phi} touches only the exported field u.
struct SolveReport {
    FieldC u;            // minimal-norm solution in the weighted space
    FieldC v;            // u e^{-phi}, the gauge in which certificates live
    double residual_rel = 0;    // ||Dbar_h v - g|| / ||g||  (== CG residual)
    double weighted_norm = 0;   // ||u||_phi
    double ortho_defect = 0;    // vs monomials z^k, k <= ortho_K
    int ortho_K = 10;
    int cg_iterations = 0;
    double truncation_tail = 0;  // mass of e^{-2phi} outside the grid radius
};

// Minimal-weighted-norm solution of dbar u = f via the substitution
// g = f e^{-phi}, w = (Dbar D)^{-1} g, v = D w, u = v e^{phi}.
SolveReport canonical_solve(const SparseHermitianOp& H, const FieldC& f,
                            double tol, int max_iter = 20000, int ortho_K = 10);

// max_k |<u, z^k>_phi| / (||u||_phi ||z^k||_phi) over 0 <= k <= K by grid
// quadrature; 0 by convention when u vanishes.
double orthogonality_defect(const GridPtr& grid, const WeightModel& w,
                            const FieldC& u, int K);

// min over random holomorphic perturbations p (degree <= 5) of
// ||u + p||_phi - ||u||_phi; +inf sentinel when trials == 0.
double minimality_probe(const GridPtr& grid, const WeightModel& w,
                        const SolveReport& report, int trials,
                        std::uint64_t seed = 0);

}  // namespace dbarlab
