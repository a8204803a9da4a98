#include "dbarlab/operators.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

namespace dbarlab {

cdouble link_phase(const WeightModel& w, cdouble p, cdouble q) {
    auto dot = [&](cdouble z) {
        auto [A1, A2] = w.vector_potential(z);
        return A1 * (q.real() - p.real()) + A2 * (q.imag() - p.imag());
    };
    const double I = (dot(p) + 4.0 * dot(0.5 * (p + q)) + dot(q)) / 6.0;
    return std::polar(1.0, -I);
}

namespace {

struct RowBuilder {
    std::vector<Eigen::Triplet<cdouble>> trip;
    Eigen::Index nrows = 0;
};

// 4th-order centered first-derivative coefficients at offsets -2..2
constexpr double kC4[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};

}  // namespace

VecC FactoredOp::interior_part(const VecC& image) const {
    if (image.size() != D.rows())
        throw usage_error("interior_part: vector not in the operator's image space");
    VecC out(grid->n);
    for (Eigen::Index k = 0; k < grid->n; ++k) out[k] = image[interior_row[static_cast<size_t>(k)]];
    return out;
}

FactoredOp assemble_D(const GridPtr& grid, const WeightModel& weight, double wilson_c) {
    const Grid2D& g = *grid;
    const double h = g.h;
    const int M = g.lattice_extent();

    FactoredOp op;
    op.grid = grid;
    op.weight = weight;
    op.wilson_c = wilson_c;
    op.interior_row.assign(static_cast<size_t>(g.n), -1);

    RowBuilder rb;
    auto zat = [&](int i, int j) { return cdouble(i * h, j * h); };

    // Block 1: -dz (centered, 4th order, links).  A row at p is kept when its
    // cross stencil reads any interior value; for interior p the row index is
    // recorded so image vectors can be restricted to the physical field.
    for (int j = -M - 2; j <= M + 2; ++j) {
        for (int i = -M - 2; i <= M + 2; ++i) {
            bool touches = g.is_interior(i, j);
            for (int o = -2; o <= 2 && !touches; ++o)
                touches = o != 0 && (g.is_interior(i + o, j) || g.is_interior(i, j + o));
            if (!touches) continue;
            const Eigen::Index r = rb.nrows++;
            if (auto k = g.index_of(i, j); k >= 0) op.interior_row[static_cast<size_t>(k)] = r;
            for (int o = -2; o <= 2; ++o) {
                if (o == 0) continue;
                const double cf = kC4[o + 2] / h;
                if (auto kx = g.index_of(i + o, j); kx >= 0)
                    rb.trip.emplace_back(r, kx, -0.5 * cf * link_phase(weight, zat(i, j), zat(i + o, j)));
                if (auto ky = g.index_of(i, j + o); ky >= 0)
                    rb.trip.emplace_back(r, ky, cdouble(0, 0.5) * cf * link_phase(weight, zat(i, j), zat(i, j + o)));
            }
        }
    }

    // Block 2: Wilson stabilizer c h L with the same links.
    const double wl = wilson_c * h;
    for (int j = -M - 1; j <= M + 1; ++j) {
        for (int i = -M - 1; i <= M + 1; ++i) {
            bool touches = g.is_interior(i, j) || g.is_interior(i + 1, j) || g.is_interior(i - 1, j) ||
                           g.is_interior(i, j + 1) || g.is_interior(i, j - 1);
            if (!touches) continue;
            const Eigen::Index r = rb.nrows++;
            if (auto k = g.index_of(i, j); k >= 0)
                rb.trip.emplace_back(r, k, cdouble(wl * 4.0 / (h * h), 0));
            const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
            for (auto& q : nb)
                if (auto kq = g.index_of(q[0], q[1]); kq >= 0)
                    rb.trip.emplace_back(r, kq, -wl / (h * h) * link_phase(weight, zat(i, j), zat(q[0], q[1])));
        }
    }

    op.D.resize(rb.nrows, g.n);
    op.D.setFromTriplets(rb.trip.begin(), rb.trip.end());
    op.D.makeCompressed();
    return op;
}

SpMatC assemble_Dbar(const FactoredOp& op) {
    SpMatC Db = op.D.adjoint();
    Db.makeCompressed();
    return Db;
}

SpMatC hermitian_gram(const SpMatC& A) {
    const Eigen::Index n = A.cols();
    Eigen::SparseMatrix<cdouble, Eigen::RowMajor> Ar(A);
    std::vector<Eigen::Triplet<cdouble>> upper;
    upper.reserve(static_cast<size_t>(Ar.nonZeros()) * 6);
    for (Eigen::Index r = 0; r < Ar.rows(); ++r) {
        // inner iterators of a row-major matrix walk columns in ascending order
        for (Eigen::SparseMatrix<cdouble, Eigen::RowMajor>::InnerIterator it(Ar, r); it; ++it) {
            for (auto jt = it; jt; ++jt) {
                upper.emplace_back(it.col(), jt.col(), std::conj(it.value()) * jt.value());
            }
        }
    }
    SpMatC U(n, n);
    U.setFromTriplets(upper.begin(), upper.end());
    SpMatC H(n, n);
    H = U.selfadjointView<Eigen::Upper>();  // mirrors by exact conjugation
    H.makeCompressed();
    return H;
}

SparseHermitianOp assemble_H(const GridPtr& grid, const WeightModel& weight, double wilson_c) {
    SparseHermitianOp out;
    out.grid = grid;
    out.weight = weight;
    out.factor = std::make_shared<FactoredOp>(assemble_D(grid, weight, wilson_c));
    out.H = hermitian_gram(out.factor->D);
    return out;
}

SparseHermitianOp assemble_schrodinger(const GridPtr& grid, const WeightModel& weight) {
    const Grid2D& g = *grid;
    const double h = g.h;
    const int M = g.lattice_extent();

    SpMatC Hsum(g.n, g.n);
    for (int axis = 0; axis < 2; ++axis) {
        const int ei = axis == 0 ? 1 : 0;
        const int ej = axis == 0 ? 0 : 1;
        std::vector<Eigen::Triplet<cdouble>> trip;
        Eigen::Index r = 0;
        for (int j = -M - 1; j <= M + 1; ++j) {
            for (int i = -M - 1; i <= M + 1; ++i) {
                const bool self = g.is_interior(i, j);
                const bool fwd = g.is_interior(i + ei, j + ej);
                if (!self && !fwd) continue;
                // Pi_j f = -i (f(p+e) - f(p))/h - A_j(p) f(p)
                if (self) {
                    auto [A1, A2] = weight.vector_potential(cdouble(i * h, j * h));
                    const double Aj = axis == 0 ? A1 : A2;
                    trip.emplace_back(r, g.index_of(i, j), cdouble(-Aj, 1.0 / h));
                }
                if (fwd)
                    trip.emplace_back(r, g.index_of(i + ei, j + ej), cdouble(0, -1.0 / h));
                ++r;
            }
        }
        SpMatC P(r, g.n);
        P.setFromTriplets(trip.begin(), trip.end());
        SpMatC G = hermitian_gram(P);
        Hsum = axis == 0 ? G : SpMatC(Hsum + G);
    }

    // electric potential enters on the diagonal
    std::vector<Eigen::Triplet<cdouble>> diag;
    for (Eigen::Index k = 0; k < g.n; ++k)
        diag.emplace_back(k, k, cdouble(weight.laplacian(g.point(k)), 0));
    SpMatC V(g.n, g.n);
    V.setFromTriplets(diag.begin(), diag.end());

    SparseHermitianOp out;
    out.grid = grid;
    out.weight = weight;
    out.H = 0.25 * (Hsum + V);
    out.H.makeCompressed();
    return out;
}

cdouble quadratic_form(const SparseHermitianOp& H, const FieldC& u, const FieldC& v) {
    if (u.grid.get() != H.grid.get() || v.grid.get() != H.grid.get())
        throw usage_error("quadratic_form: fields on a different grid than the operator");
    const VecC Hu = H.H * u.values;
    return integrate(*H.grid, Hu, v.values);
}

void export_matrix_market(const SpMatC& H, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write matrix file: " + path);
    // lower triangle per the hermitian coordinate convention
    Eigen::Index nnz = 0;
    for (Eigen::Index c = 0; c < H.outerSize(); ++c)
        for (SpMatC::InnerIterator it(H, c); it; ++it)
            if (it.row() >= it.col()) ++nnz;
    out << "%%MatrixMarket matrix coordinate complex hermitian\n";
    out << H.rows() << " " << H.cols() << " " << nnz << "\n";
    out << std::setprecision(17);
    for (Eigen::Index c = 0; c < H.outerSize(); ++c)
        for (SpMatC::InnerIterator it(H, c); it; ++it)
            if (it.row() >= it.col())
                out << it.row() + 1 << " " << it.col() + 1 << " "
                    << it.value().real() << " " << it.value().imag() << "\n";
}

}  // namespace dbarlab
