#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dbarlab/common.hpp"

namespace dbarlab {

// Subharmonic weight phi with derivative data: phi_z, Laplacian, gauge field
// A = -phi_y dx + phi_x dy.  Monomial family phi = |z|^m (m >= 2) is analytic;
// tabulated weights carry samples on a uniform lattice and differentiate by
// centered differences (their boundary ring is excluded from queries).
class WeightModel {
  public:
    enum class Kind { monomial, tabulated };

    WeightModel() = default;  // the Fock weight |z|^2

    static WeightModel monomial(double m);

    // Samples phi(x0 + i*dx, y0 + j*dx) row-major, j outer.
    static WeightModel tabulated(double x0, double y0, double dx,
                                 int nx, int ny, std::vector<double> phi);

    static WeightModel tabulated_from_csv(const std::string& path);

    Kind kind() const { return kind_; }
    double exponent() const { return m_; }

    double eval(cdouble z) const;
    cdouble wirtinger_gradient(cdouble z) const;
    double laplacian(cdouble z) const;
    // (A1, A2) = (-phi_y, phi_x); the induced field dA equals the Laplacian.
    std::pair<double, double> vector_potential(cdouble z) const;

    // Largest |z| with the weight (and its derivatives) evaluable; monomials
    // are unbounded (returns +inf).
    double derivative_domain_radius() const;

    std::string describe() const;

  private:
    Kind kind_ = Kind::monomial;
    double m_ = 2.0;

    double x0_ = 0, y0_ = 0, dx_ = 0;
    int nx_ = 0, ny_ = 0;
    std::vector<double> phi_;

    double table_at(int i, int j) const { return phi_[static_cast<size_t>(j) * nx_ + i]; }
    double bilinear(const std::vector<double>& f, int nx, int ny,
                    double x0, double y0, cdouble z) const;
    std::vector<double> gx_, gy_, lap_;  // centered-difference fields on the inner lattice
};

struct DoublingSample {
    cdouble z;
    double r;
    double ratio;  // nu(B(z,2r)) / nu(B(z,r))
};

// Sampled audit of the doubling / lower-bound measure conditions for
// nu = laplacian * area.  Never a certificate; the sample set is recorded.
struct DoublingReport {
    double C_hat = 0.0;      // max observed ratio
    double delta_hat = 0.0;  // min observed nu(B(z,1))
    std::vector<DoublingSample> samples;
};

// Midpoint quadrature of nu over balls at the given centers/radii plus the
// unit-ball minimum.  `resolution` is the quadrature cell size.
DoublingReport doubling_report(const WeightModel& w,
                               const std::vector<cdouble>& centers,
                               const std::vector<double>& radii,
                               double resolution);

}  // namespace dbarlab
