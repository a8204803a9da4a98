#include "dbarlab/compactness.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace dbarlab {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Compact: return "Compact";
        case Verdict::NonCompact: return "NonCompact";
        default: return "Inconclusive";
    }
}

namespace {

SpMatC principal_submatrix(const SpMatC& H, const std::vector<Eigen::Index>& sel) {
    std::vector<Eigen::Index> inv(static_cast<size_t>(H.rows()), -1);
    for (size_t s = 0; s < sel.size(); ++s) inv[static_cast<size_t>(sel[s])] = static_cast<Eigen::Index>(s);
    std::vector<Eigen::Triplet<cdouble>> trip;
    for (Eigen::Index c = 0; c < H.outerSize(); ++c) {
        const Eigen::Index cc = inv[static_cast<size_t>(c)];
        if (cc < 0) continue;
        for (SpMatC::InnerIterator it(H, c); it; ++it) {
            const Eigen::Index rr = inv[static_cast<size_t>(it.row())];
            if (rr >= 0) trip.emplace_back(rr, cc, it.value());
        }
    }
    SpMatC S(static_cast<Eigen::Index>(sel.size()), static_cast<Eigen::Index>(sel.size()));
    S.setFromTriplets(trip.begin(), trip.end());
    S.makeCompressed();
    return S;
}

double ring_min_laplacian(const WeightModel& w, double radius, int samples) {
    double lo = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const double th = 2.0 * M_PI * s / samples;
        lo = std::min(lo, w.laplacian(std::polar(radius, th)));
    }
    return lo;
}

}  // namespace

double local_ground_energy(const SparseHermitianOp& H, cdouble z0, double r,
                           double tol, std::uint64_t seed) {
    const auto sel = ball_subgrid(*H.grid, z0, r);
    if (sel.size() < 16)
        throw resolution_error("local_ground_energy: ball holds fewer than 16 grid points");
    const SpMatC S = principal_submatrix(H.H, sel);
    const EigenResult e = smallest_eigs_matrix(S, H.grid->h, 1, tol, seed);
    return e.lambdas[0];
}

MuProfile mu_profile(const SparseHermitianOp& H, const std::vector<double>& radii,
                     int samples_per_ring, double ball_radius, double tol,
                     std::uint64_t seed, int workers) {
    const Grid2D& g = *H.grid;
    MuProfile prof;
    if (radii.empty()) return prof;
    if (samples_per_ring < 1) throw config_error("mu_profile: samples_per_ring must be >= 1");
    for (double rho : radii)
        if (rho + ball_radius > g.R + 1e-12)
            throw config_error("mu_profile: ring radius " + std::to_string(rho) +
                               " leaves no unit-ball margin inside R=" + std::to_string(g.R));

    // one task per ring center; reduce to per-ring minima afterwards so the
    // result does not depend on scheduling
    struct Task { size_t ring; double theta; };
    std::vector<Task> tasks;
    for (size_t r = 0; r < radii.size(); ++r)
        for (int s = 0; s < samples_per_ring; ++s)
            tasks.push_back({r, 2.0 * M_PI * s / samples_per_ring});
    std::vector<double> mu(tasks.size());

    const int nw = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    if (nw == 1) {
        for (size_t t = 0; t < tasks.size(); ++t)
            mu[t] = local_ground_energy(H, std::polar(radii[tasks[t].ring], tasks[t].theta),
                                        ball_radius, tol, seed);
    } else {
        std::atomic<size_t> next{0};
        std::exception_ptr fail;
        std::mutex fail_mx;
        auto worker = [&] {
            for (size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) {
                try {
                    mu[t] = local_ground_energy(H, std::polar(radii[tasks[t].ring], tasks[t].theta),
                                                ball_radius, tol, seed);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(fail_mx);
                    if (!fail) fail = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (fail) std::rethrow_exception(fail);
    }

    for (size_t r = 0; r < radii.size(); ++r) {
        double lo = std::numeric_limits<double>::infinity();
        for (size_t t = 0; t < tasks.size(); ++t)
            if (tasks[t].ring == r) lo = std::min(lo, mu[t]);
        prof.points.emplace_back(radii[r], lo);
    }
    // least-squares slope of mu vs radius
    const size_t np = prof.points.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : prof.points) { sx += x; sy += y; sxx += x * x; sxy += x * y; }
    const double denom = np * sxx - sx * sx;
    prof.slope = denom != 0 ? (np * sxy - sx * sy) / denom : 0.0;
    prof.mean = sy / static_cast<double>(np);
    return prof;
}

double magnetic_integral(const Grid2D& grid, const WeightModel& w, cdouble w0) {
    if (std::max(std::abs(w0.real()), std::abs(w0.imag())) + 1.0 > grid.R + 1e-12)
        throw config_error("magnetic_integral: unit ball at w not inside the grid");
    const auto sel = ball_subgrid(grid, w0, 1.0);
    double s = 0;
    for (Eigen::Index k : sel) {
        const double lap = w.laplacian(grid.point(k));
        s += (lap * lap + lap) * grid.h * grid.h;
    }
    return s;
}

CompactnessReport classify(const GridPtr& grid, const WeightModel& w,
                           const ClassifyParams& params) {
    const Grid2D& g = *grid;
    CompactnessReport rep;
    rep.params = params;

    if (params.radii.empty())
        throw config_error("classify: need at least one scan radius");
    for (double rho : params.radii)
        if (rho + params.ball_radius > g.R + 1e-12)
            throw config_error("classify: scan radius " + std::to_string(rho) +
                               " outside the grid with unit-ball margin");

    // sufficient test: the electric potential diverges along the scan rings
    for (double rho : params.radii)
        rep.laplacian_profile.emplace_back(rho, ring_min_laplacian(w, rho, params.samples_per_ring));
    const double lap_in = rep.laplacian_profile.front().second;
    const double lap_out = rep.laplacian_profile.back().second;
    const bool divergence = lap_out >= params.divergence_ratio * lap_in && lap_out >= params.divergence_floor;
    if (divergence) rep.criteria_fired.push_back("laplacian_divergence");

    // sufficient witness: growing lower envelope of local ground energies
    const SparseHermitianOp H = assemble_H(grid, w);
    rep.mu_profile = mu_profile(H, params.radii, params.samples_per_ring,
                                params.ball_radius, params.eigs_tol, params.seed,
                                params.workers);
    bool increasing = rep.mu_profile.points.size() >= 2;
    for (size_t i = 1; i < rep.mu_profile.points.size(); ++i)
        increasing = increasing &&
                     rep.mu_profile.points[i].second > rep.mu_profile.points[i - 1].second;
    const bool mu_growth = increasing &&
                      rep.mu_profile.slope >= params.mu_slope_rel * rep.mu_profile.mean;
    if (mu_growth) rep.criteria_fired.push_back("mu_profile_growth");

    // noncompactness signature: flat magnetic integral plus degeneracy growth
    double fmin = std::numeric_limits<double>::infinity(), fmax = 0, fsum = 0;
    int fcnt = 0;
    for (double rho : params.radii) {
        for (int s = 0; s < params.samples_per_ring; ++s) {
            const double th = 2.0 * M_PI * s / params.samples_per_ring;
            const cdouble w0 = std::polar(rho, th);
            const double F = magnetic_integral(g, w, w0);
            fmin = std::min(fmin, F);
            fmax = std::max(fmax, F);
            fsum += F;
            ++fcnt;
        }
        rep.magnetic_integral_profile.emplace_back(rho, magnetic_integral(g, w, cdouble(rho, 0)));
    }
    const double fmean = fsum / fcnt;
    const bool flat = fmean > 0 && (fmax - fmin) <= params.eps_flat * fmean;

    bool growth = false;
    if (flat) {
        const double Rbig = g.R;
        const double Rsmall = std::max(params.small_R_frac * Rbig,
                                       2.0 * params.ball_radius + 4 * g.h);
        const auto gs = build_grid(Rsmall, g.h, g.shape);
        const auto Hb = H;
        const auto Hs = assemble_H(gs, w);
        const int kb = std::min<int>(params.deg_k_big, static_cast<int>(g.n / 4));
        const int ks = std::min<int>(params.deg_k_small, static_cast<int>(gs->n / 4));
        const EigenResult eb = smallest_eigs(Hb, kb, params.eigs_tol, params.seed);
        const EigenResult es = smallest_eigs(Hs, ks, params.eigs_tol, params.seed);
        const double center = eb.lambdas.size() ? eb.lambdas[0] : 0.0;
        const ClusterCount cb = cluster_count(eb, center, params.deg_halfwidth);
        const ClusterCount cs = cluster_count(es, center, params.deg_halfwidth);
        rep.degeneracy_growth.emplace_back(Rsmall, cs.count);
        rep.degeneracy_growth.emplace_back(Rbig, cb.count);
        growth = !cb.saturated && !cs.saturated && cs.count > 0 &&
                 cb.count >= params.growth_ratio * cs.count;
    }
    const bool flux_signature = flat && growth;
    if (flux_signature) rep.criteria_fired.push_back("flat_integral_degeneracy_growth");

    const bool compact_evidence = divergence || mu_growth;
    if (compact_evidence && flux_signature)
        throw consistency_error("classify: compactness and noncompactness criteria fired together");
    if (compact_evidence)
        rep.verdict = Verdict::Compact;
    else if (flux_signature)
        rep.verdict = Verdict::NonCompact;
    else
        rep.verdict = Verdict::Inconclusive;
    return rep;
}

}  // namespace dbarlab
