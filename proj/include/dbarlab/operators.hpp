#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dbarlab/grid.hpp"
#include "dbarlab/weights.hpp"

namespace dbarlab {

// Wilson stabilizer strength for the factored assembly.  Fixed constant of
// the scheme: large enough to gap the opposite-chirality lattice branch
// (gap ~ 16 c^2 / h^2), small enough that the O(c^2 h^2) shift of the low
// Landau clusters stays inside the acceptance windows.
inline constexpr double kWilsonC = 0.25;

// Discrete D = -d/dz + phi_z as a rectangular gauge-link operator.
//
// Row block 1 discretizes -dz with 4th-order centered differences whose hops
// carry link phases exp(-i int A.dl); the phases reproduce the phi_z term of
// D in the continuum limit while keeping the hop moduli field-free, which is
// what protects the Gram spectrum at strong |A|.  Row block 2 is a Wilson
// stabilizer (c h L with the same links) in rows of its own, so the Gram
// symbol is |sigma_D|^2 + c^2 h^2 |sigma_L|^2 and cannot develop the
// spurious near-kernel a plain one-sided factorization has.
//
// Rows exist wherever a stencil reads at least one interior value, so the
// Gram below is the Dirichlet restriction of the full-lattice form.
struct FactoredOp {
    GridPtr grid;
    WeightModel weight;
    double wilson_c = kWilsonC;
    SpMatC D;                              // rows x n
    std::vector<Eigen::Index> interior_row;  // block-1 row of interior point k

    Eigen::Index rows() const { return D.rows(); }
    Eigen::Index cols() const { return D.cols(); }

    VecC apply(const VecC& v) const { return D * v; }
    // Physical (block-1, interior) part of an image-space vector.
    VecC interior_part(const VecC& image) const;
};

struct SparseHermitianOp {
    GridPtr grid;
    WeightModel weight;
    SpMatC H;  // n x n, equal to its conjugate transpose bit-exactly
    std::shared_ptr<const FactoredOp> factor;  // null for the Schrodinger-form assembly
};

FactoredOp assemble_D(const GridPtr& grid, const WeightModel& weight,
                      double wilson_c = kWilsonC);

// Conjugate transpose of D_h; a consistent discretization of
// dbar = d/dzbar + phi_zbar on the image space.
SpMatC assemble_Dbar(const FactoredOp& op);

// H = Dbar_h D_h, assembled Hermitian by construction (upper triangle
// accumulated in fixed row order, lower mirrored by conjugation).
SparseHermitianOp assemble_H(const GridPtr& grid, const WeightModel& weight,
                             double wilson_c = kWilsonC);

// Independent cross-check assembly H' = 1/4 (sum_j Pi_j^H Pi_j + diag(lap)),
// Pi_j = -i d_j(forward) - A_j entering as diagonal terms, ghost rows at the
// Dirichlet ring.  Shares no code path with assemble_H.
SparseHermitianOp assemble_schrodinger(const GridPtr& grid, const WeightModel& weight);

// <H u, v> under the h^2-weighted inner product.
cdouble quadratic_form(const SparseHermitianOp& H, const FieldC& u, const FieldC& v);

// Hermitian Gram A^H A with bit-exact symmetry.
SpMatC hermitian_gram(const SpMatC& A);

// exp(-i int_p^q A.dl) along the straight segment, Simpson rule.
cdouble link_phase(const WeightModel& w, cdouble p, cdouble q);

void export_matrix_market(const SpMatC& H, const std::string& path);

}  // namespace dbarlab
