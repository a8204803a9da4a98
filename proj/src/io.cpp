#include "dbarlab/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dbarlab {

void write_field_csv(const std::string& path, const FieldC& f) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write field: " + path);
    out << "x,y,re,im\n" << std::setprecision(17);
    const Grid2D& g = *f.grid;
    for (Eigen::Index k = 0; k < g.n; ++k) {
        const cdouble z = g.point(k);
        out << z.real() << "," << z.imag() << "," << f.values[k].real() << ","
            << f.values[k].imag() << "\n";
    }
}

FieldC read_field_csv(const std::string& path, const GridPtr& grid) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read field: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,re,im", 0) != 0)
        throw config_error("field CSV must start with header 'x,y,re,im': " + path);
    VecC v = VecC::Zero(grid->n);
    std::vector<bool> seen(static_cast<size_t>(grid->n), false);
    const double h = grid->h;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c, d;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') ||
            !std::getline(ss, c, ',') || !std::getline(ss, d))
            throw config_error("malformed field row: " + line);
        const double x = std::stod(a), y = std::stod(b);
        const int i = static_cast<int>(std::llround(x / h));
        const int j = static_cast<int>(std::llround(y / h));
        if (std::abs(i * h - x) > 1e-9 * std::max(1.0, std::abs(x)) ||
            std::abs(j * h - y) > 1e-9 * std::max(1.0, std::abs(y)))
            throw config_error("field sample off the grid lattice: " + line);
        const auto k = grid->index_of(i, j);
        if (k < 0) throw config_error("field sample outside grid interior: " + line);
        v[k] = cdouble(std::stod(c), std::stod(d));
        seen[static_cast<size_t>(k)] = true;
    }
    for (bool s : seen)
        if (!s) throw config_error("field CSV does not cover the grid interior: " + path);
    return FieldC(grid, std::move(v));
}

void write_eigs_csv(const std::string& path, const EigenResult& e) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write eigenvalues: " + path);
    out << "index,lambda,residual,converged\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < e.lambdas.size(); ++i)
        out << i << "," << e.lambdas[i] << "," << e.residuals[i] << ","
            << (e.converged[static_cast<size_t>(i)] ? 1 : 0) << "\n";
}

void write_dat(const std::string& path, const std::vector<std::pair<double, double>>& rows) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write profile: " + path);
    out << std::setprecision(17);
    for (auto& [a, b] : rows) out << a << " " << b << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write: " + path);
    out << content;
}

}  // namespace dbarlab
