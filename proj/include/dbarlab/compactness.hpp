#pragma once

#include <string>
#include <vector>

#include "dbarlab/spectra.hpp"

namespace dbarlab {

enum class Verdict { Compact, NonCompact, Inconclusive };

std::string to_string(Verdict v);

// All thresholds are artifact decisions (flagged in every report); defaults
// follow the model-weight separations, which are order-of-magnitude.
struct ClassifyParams {
    std::vector<double> radii{1.0, 2.0, 3.0, 4.0};
    int samples_per_ring = 8;
    double ball_radius = 1.0;
    double eps_flat = 0.15;      // "constant as |w| -> infinity" band
    double divergence_ratio = 4.0;     // outermost-ring min lap >= ratio * innermost
    double divergence_floor = 10.0;    //   ... and >= floor
    double growth_ratio = 1.5;   // lowest-cluster degeneracy growth between R's
    double mu_slope_rel = 0.1;   // mu profile slope threshold, relative to mean
    double small_R_frac = 2.0 / 3.0;
    int deg_k_big = 160;
    int deg_k_small = 120;
    double deg_halfwidth = 0.2;
    double eigs_tol = 1e-8;
    std::uint64_t seed = 0;
    int workers = 1;  // parallel ball eigenproblems in the ring scans
};

struct MuProfile {
    std::vector<std::pair<double, double>> points;  // (radius, min mu_hat on ring)
    double slope = 0;  // least-squares slope of mu_hat vs radius
    double mean = 0;
};

struct CompactnessReport {
    Verdict verdict = Verdict::Inconclusive;
    MuProfile mu_profile;
    std::vector<std::pair<double, double>> magnetic_integral_profile;  // (|w|, F(w))
    std::vector<std::pair<double, double>> laplacian_profile;          // (radius, min lap)
    std::vector<std::pair<double, int>> degeneracy_growth;             // (R, cluster count)
    std::vector<std::string> criteria_fired;
    ClassifyParams params;
};

// Smallest eigenvalue of H restricted to the ball subgrid (Dirichlet on the
// ball boundary) — the numerical witness mu_hat(z0).
double local_ground_energy(const SparseHermitianOp& H, cdouble z0, double r,
                           double tol = 1e-8, std::uint64_t seed = 0);

// Ring scans parallelize over centers (independent ball problems) when
// workers > 1; the profile is identical either way.
MuProfile mu_profile(const SparseHermitianOp& H, const std::vector<double>& radii,
                     int samples_per_ring, double ball_radius = 1.0,
                     double tol = 1e-8, std::uint64_t seed = 0, int workers = 1);

// Quadrature of |lap|^2 + lap over the unit ball at w (B = lap for
// weight-induced fields), on the grid's own nodes.
double magnetic_integral(const Grid2D& grid, const WeightModel& w, cdouble w0);

CompactnessReport classify(const GridPtr& grid, const WeightModel& w,
                           const ClassifyParams& params = {});

}  // namespace dbarlab
