#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace dbarlab {

using cdouble = std::complex<double>;
using SpMatC = Eigen::SparseMatrix<cdouble>;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct usage_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Query outside the domain a weight or grid is defined on.
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Quadrature / ball sampling too coarse for the requested region.
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct empty_region_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver hit its cap; carries the residual it reached.
struct convergence_error : std::runtime_error {
    double achieved_residual;
    convergence_error(const std::string& msg, double res)
        : std::runtime_error(msg), achieved_residual(res) {}
};

struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a, used for content-addressed cache keys and config hashes.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = d[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace dbarlab
