#include "dbarlab/weights.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace dbarlab {

WeightModel WeightModel::monomial(double m) {
    if (!(m >= 2.0))
        throw config_error("monomial exponent must satisfy m >= 2, got m=" + std::to_string(m));
    WeightModel w;
    w.kind_ = Kind::monomial;
    w.m_ = m;
    return w;
}

WeightModel WeightModel::tabulated(double x0, double y0, double dx,
                                   int nx, int ny, std::vector<double> phi) {
    if (dx <= 0 || nx < 5 || ny < 5)
        throw config_error("tabulated weight needs dx > 0 and at least a 5x5 table");
    if (phi.size() != static_cast<size_t>(nx) * ny)
        throw config_error("tabulated weight: sample count does not match nx*ny");
    WeightModel w;
    w.kind_ = Kind::tabulated;
    w.x0_ = x0; w.y0_ = y0; w.dx_ = dx;
    w.nx_ = nx; w.ny_ = ny;
    w.phi_ = std::move(phi);

    // Centered differences on the inner (nx-2)x(ny-2) lattice; the boundary
    // ring has no derivative data and is excluded from the query domain.
    const int mx = nx - 2, my = ny - 2;
    w.gx_.assign(static_cast<size_t>(mx) * my, 0.0);
    w.gy_.assign(static_cast<size_t>(mx) * my, 0.0);
    w.lap_.assign(static_cast<size_t>(mx) * my, 0.0);
    for (int j = 1; j + 1 < ny; ++j) {
        for (int i = 1; i + 1 < nx; ++i) {
            const size_t k = static_cast<size_t>(j - 1) * mx + (i - 1);
            w.gx_[k] = (w.table_at(i + 1, j) - w.table_at(i - 1, j)) / (2 * dx);
            w.gy_[k] = (w.table_at(i, j + 1) - w.table_at(i, j - 1)) / (2 * dx);
            w.lap_[k] = (w.table_at(i + 1, j) + w.table_at(i - 1, j) +
                         w.table_at(i, j + 1) + w.table_at(i, j - 1) -
                         4.0 * w.table_at(i, j)) / (dx * dx);
            if (w.lap_[k] < -1e-8 * std::max(1.0, std::abs(w.table_at(i, j))))
                throw domain_error("tabulated weight violates subharmonicity at table node (" +
                                   std::to_string(x0 + i * dx) + "," + std::to_string(y0 + j * dx) + ")");
        }
    }
    return w;
}

WeightModel WeightModel::tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open weight table: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,phi", 0) != 0)
        throw config_error("weight table must start with header 'x,y,phi': " + path);
    std::map<long long, std::map<long long, double>> rows;  // j -> i -> phi
    std::vector<double> xs, ys;
    double xmin = 0, ymin = 0, dx = 0;
    std::vector<std::array<double, 3>> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw config_error("malformed weight table row: " + line);
        pts.push_back({std::stod(a), std::stod(b), std::stod(c)});
    }
    if (pts.size() < 25) throw config_error("weight table too small: " + path);
    xmin = pts[0][0]; ymin = pts[0][1];
    for (auto& p : pts) { xmin = std::min(xmin, p[0]); ymin = std::min(ymin, p[1]); }
    // infer spacing from the smallest positive x-gap
    dx = std::numeric_limits<double>::infinity();
    for (auto& p : pts) {
        double d = p[0] - xmin;
        if (d > 1e-12) dx = std::min(dx, d);
    }
    if (!std::isfinite(dx)) throw config_error("weight table has a single x value: " + path);
    long long imax = 0, jmax = 0;
    for (auto& p : pts) {
        long long i = std::llround((p[0] - xmin) / dx);
        long long j = std::llround((p[1] - ymin) / dx);
        if (std::abs(p[0] - (xmin + i * dx)) > 1e-6 * dx || std::abs(p[1] - (ymin + j * dx)) > 1e-6 * dx)
            throw config_error("weight table is not a uniform grid: " + path);
        rows[j][i] = p[2];
        imax = std::max(imax, i);
        jmax = std::max(jmax, j);
    }
    const int nx = static_cast<int>(imax) + 1, ny = static_cast<int>(jmax) + 1;
    std::vector<double> phi(static_cast<size_t>(nx) * ny, 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            auto rj = rows.find(j);
            if (rj == rows.end() || rj->second.find(i) == rj->second.end())
                throw config_error("weight table has holes: " + path);
            phi[static_cast<size_t>(j) * nx + i] = rj->second[i];
        }
    return tabulated(xmin, ymin, dx, nx, ny, std::move(phi));
}

double WeightModel::bilinear(const std::vector<double>& f, int nx, int ny,
                             double x0, double y0, cdouble z) const {
    const double fx = (z.real() - x0) / dx_;
    const double fy = (z.imag() - y0) / dx_;
    if (fx < -1e-9 || fy < -1e-9 || fx > nx - 1 + 1e-9 || fy > ny - 1 + 1e-9)
        throw domain_error("query outside tabulated weight domain");
    int i = std::min(static_cast<int>(fx), nx - 2);
    int j = std::min(static_cast<int>(fy), ny - 2);
    i = std::max(i, 0); j = std::max(j, 0);
    const double tx = fx - i, ty = fy - j;
    auto at = [&](int a, int b) { return f[static_cast<size_t>(b) * nx + a]; };
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
           (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
}

double WeightModel::eval(cdouble z) const {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw domain_error("weight evaluated at non-finite point");
    if (kind_ == Kind::monomial)
        return std::pow(std::abs(z), m_);
    return bilinear(phi_, nx_, ny_, x0_, y0_, z);
}

cdouble WeightModel::wirtinger_gradient(cdouble z) const {
    if (kind_ == Kind::monomial) {
        const double az = std::abs(z);
        if (az == 0.0) return 0.0;  // m >= 2 keeps this finite
        return 0.5 * m_ * std::pow(az, m_ - 2.0) * std::conj(z);
    }
    // phi_z = (phi_x - i phi_y)/2 from the centered-difference fields
    const double gx = bilinear(gx_, nx_ - 2, ny_ - 2, x0_ + dx_, y0_ + dx_, z);
    const double gy = bilinear(gy_, nx_ - 2, ny_ - 2, x0_ + dx_, y0_ + dx_, z);
    return cdouble(0.5 * gx, -0.5 * gy);
}

double WeightModel::laplacian(cdouble z) const {
    if (kind_ == Kind::monomial) {
        const double az = std::abs(z);
        if (az == 0.0) return m_ > 2.0 ? 0.0 : (m_ == 2.0 ? 4.0 : 0.0);
        return m_ * m_ * std::pow(az, m_ - 2.0);
    }
    const double l = bilinear(lap_, nx_ - 2, ny_ - 2, x0_ + dx_, y0_ + dx_, z);
    if (l < -1e-6) throw domain_error("tabulated weight: negative Laplacian at query point");
    return std::max(l, 0.0);
}

std::pair<double, double> WeightModel::vector_potential(cdouble z) const {
    if (kind_ == Kind::monomial) {
        const double az = std::abs(z);
        if (az == 0.0) return {0.0, 0.0};
        const double g = m_ * std::pow(az, m_ - 2.0);
        return {-g * z.imag(), g * z.real()};
    }
    const double gx = bilinear(gx_, nx_ - 2, ny_ - 2, x0_ + dx_, y0_ + dx_, z);
    const double gy = bilinear(gy_, nx_ - 2, ny_ - 2, x0_ + dx_, y0_ + dx_, z);
    return {-gy, gx};
}

double WeightModel::derivative_domain_radius() const {
    if (kind_ == Kind::monomial) return std::numeric_limits<double>::infinity();
    // largest radius around 0 fully inside the derivative lattice
    const double xlo = x0_ + dx_, xhi = x0_ + (nx_ - 2) * dx_;
    const double ylo = y0_ + dx_, yhi = y0_ + (ny_ - 2) * dx_;
    return std::min(std::min(-xlo, xhi), std::min(-ylo, yhi));
}

std::string WeightModel::describe() const {
    if (kind_ == Kind::monomial) return "monomial m=" + std::to_string(m_);
    return "tabulated " + std::to_string(nx_) + "x" + std::to_string(ny_) +
           " dx=" + std::to_string(dx_);
}

namespace {

double ball_measure(const WeightModel& w, cdouble c, double r, double res) {
    // midpoint rule over cells whose centers fall in the ball
    const int M = static_cast<int>(std::ceil(r / res)) + 1;
    double s = 0.0;
    for (int j = -M; j <= M; ++j)
        for (int i = -M; i <= M; ++i) {
            const cdouble z = c + cdouble((i + 0.5) * res, (j + 0.5) * res);
            if (std::abs(z - c) < r) s += w.laplacian(z) * res * res;
        }
    return s;
}

}  // namespace

DoublingReport doubling_report(const WeightModel& w,
                               const std::vector<cdouble>& centers,
                               const std::vector<double>& radii,
                               double resolution) {
    if (resolution <= 0) throw config_error("doubling_report: resolution must be positive");
    for (double r : radii) {
        if (r <= 0) throw config_error("doubling_report: radii must be positive");
        if (resolution > r / 4)
            throw resolution_error("doubling_report: resolution coarser than radius/4");
    }
    if (resolution > 0.25)
        throw resolution_error("doubling_report: resolution coarser than unit-ball scale");

    DoublingReport rep;
    rep.C_hat = 0.0;
    rep.delta_hat = std::numeric_limits<double>::infinity();
    for (cdouble c : centers) {
        rep.delta_hat = std::min(rep.delta_hat, ball_measure(w, c, 1.0, resolution));
        for (double r : radii) {
            const double n1 = ball_measure(w, c, r, resolution);
            const double n2 = ball_measure(w, c, 2 * r, resolution);
            if (n1 <= 1e-300) continue;  // measure vanishes on the small ball
            const double ratio = n2 / n1;
            rep.samples.push_back({c, r, ratio});
            rep.C_hat = std::max(rep.C_hat, ratio);
        }
    }
    if (!std::isfinite(rep.delta_hat)) rep.delta_hat = 0.0;
    return rep;
}

}  // namespace dbarlab
