#include "dbarlab/grid.hpp"

#include <cmath>

namespace dbarlab {

GridPtr build_grid(double R, double h, GridShape shape) {
    if (!(R > 0) || !(h > 0))
        throw config_error("grid: R and h must be positive");
    if (h > R / 2 + 1e-12)
        throw config_error("grid: spacing h=" + std::to_string(h) +
                           " too coarse for R=" + std::to_string(R));
    auto g = std::make_shared<Grid2D>();
    g->R = R;
    g->h = h;
    g->shape = shape;
    const int M = static_cast<int>(std::floor(R / h + 1e-9));
    g->M_ = M;
    g->idx_.assign(static_cast<size_t>(2 * M + 1) * (2 * M + 1), -1);
    const double tol = 1e-12 * std::max(1.0, R);
    for (int j = -M; j <= M; ++j) {
        for (int i = -M; i <= M; ++i) {
            const double x = i * h, y = j * h;
            bool inside;
            if (shape == GridShape::square)
                inside = std::abs(x) < R - tol && std::abs(y) < R - tol;
            else
                inside = x * x + y * y < R * R - tol;
            if (inside) {
                g->idx_[g->pack(i, j)] = g->n;
                g->pts_.emplace_back(i, j);
                ++g->n;
            }
        }
    }
    if (g->n <= 0) throw config_error("grid: no interior points");
    return g;
}

SpMatC dz_forward(const Grid2D& g) {
    const double h = g.h;
    std::vector<Eigen::Triplet<cdouble>> trip;
    trip.reserve(static_cast<size_t>(3 * g.n));
    for (Eigen::Index k = 0; k < g.n; ++k) {
        auto [i, j] = g.ij_of(k);
        trip.emplace_back(k, k, cdouble(-0.5 / h, 0.5 / h));  // -(1 - i)/(2h)
        if (auto kx = g.index_of(i + 1, j); kx >= 0)
            trip.emplace_back(k, kx, cdouble(0.5 / h, 0.0));
        if (auto ky = g.index_of(i, j + 1); ky >= 0)
            trip.emplace_back(k, ky, cdouble(0.0, -0.5 / h));
    }
    SpMatC D(g.n, g.n);
    D.setFromTriplets(trip.begin(), trip.end());
    D.makeCompressed();
    return D;
}

cdouble integrate(const Grid2D& g, const VecC& u, const VecC& v) {
    if (u.size() != g.n || v.size() != g.n)
        throw usage_error("integrate: field length does not match grid");
    return g.h * g.h * v.dot(u);  // Eigen dot conjugates its callee
}

cdouble integrate(const FieldC& u, const FieldC& v) {
    if (u.grid.get() != v.grid.get())
        throw usage_error("integrate: fields live on different grids");
    return integrate(*u.grid, u.values, v.values);
}

double norm_l2(const Grid2D& g, const VecC& u) {
    return g.h * u.norm();
}

std::vector<Eigen::Index> ball_subgrid(const Grid2D& g, cdouble center, double radius) {
    if (!(radius > 0)) throw config_error("ball_subgrid: radius must be positive");
    std::vector<Eigen::Index> sel;
    for (Eigen::Index k = 0; k < g.n; ++k)
        if (std::abs(g.point(k) - center) < radius) sel.push_back(k);
    if (sel.empty())
        throw empty_region_error("ball_subgrid: ball does not meet the grid interior");
    return sel;
}

}  // namespace dbarlab
