#pragma once

#include <memory>
#include <vector>

#include "dbarlab/common.hpp"

namespace dbarlab {

enum class GridShape { square, disk };

// Uniform lattice (i*h, j*h) truncating the plane to [-R,R]^2; points strictly
// inside the mask are interior unknowns, everything else is Dirichlet.
class Grid2D {
  public:
    double R = 0, h = 0;
    GridShape shape = GridShape::square;
    Eigen::Index n = 0;  // interior point count

    int lattice_extent() const { return M_; }

    bool is_interior(int i, int j) const {
        if (std::abs(i) > M_ || std::abs(j) > M_) return false;
        return idx_[pack(i, j)] >= 0;
    }
    // -1 when (i,j) is not interior
    Eigen::Index index_of(int i, int j) const {
        if (std::abs(i) > M_ || std::abs(j) > M_) return -1;
        return idx_[pack(i, j)];
    }
    std::pair<int, int> ij_of(Eigen::Index k) const { return pts_[static_cast<size_t>(k)]; }
    cdouble point(Eigen::Index k) const {
        auto [i, j] = pts_[static_cast<size_t>(k)];
        return cdouble(i * h, j * h);
    }

    friend std::shared_ptr<const Grid2D> build_grid(double R, double h, GridShape shape);

  private:
    int M_ = 0;
    std::vector<Eigen::Index> idx_;
    std::vector<std::pair<int, int>> pts_;
    size_t pack(int i, int j) const {
        return static_cast<size_t>(j + M_) * (2 * M_ + 1) + static_cast<size_t>(i + M_);
    }
};

using GridPtr = std::shared_ptr<const Grid2D>;

// Complex scalar field on a grid's interior points.
struct FieldC {
    GridPtr grid;
    VecC values;

    FieldC() = default;
    FieldC(GridPtr g, VecC v) : grid(std::move(g)), values(std::move(v)) {
        if (!grid || values.size() != grid->n)
            throw usage_error("FieldC: length does not match grid interior count");
    }
};

GridPtr build_grid(double R, double h, GridShape shape);

// Sample a function of z on the interior points.
template <typename F>
FieldC sample(const GridPtr& g, F&& f) {
    VecC v(g->n);
    for (Eigen::Index k = 0; k < g->n; ++k) v[k] = f(g->point(k));
    return FieldC(g, std::move(v));
}

// Discrete Wirtinger operator d/dz = (d/dx - i d/dy)/2, forward one-sided
// differences, rows at interior points; neighbors outside the interior read 0.
SpMatC dz_forward(const Grid2D& g);

// h^2-weighted inner product  (u,v) = h^2 sum u conj(v); all adjointness
// statements refer to this product.
cdouble integrate(const FieldC& u, const FieldC& v);
cdouble integrate(const Grid2D& g, const VecC& u, const VecC& v);
double norm_l2(const Grid2D& g, const VecC& u);

// Interior indices with |z - center| < radius.
std::vector<Eigen::Index> ball_subgrid(const Grid2D& g, cdouble center, double radius);

}  // namespace dbarlab
