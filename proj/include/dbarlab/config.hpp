#pragma once

#include <string>
#include <vector>

#include "dbarlab/common.hpp"

namespace dbarlab {

// One experiment = one config.  TOML-style file, strict parsing (unknown keys
// rejected before any computation), CLI overrides of the form --grid.R=8 win.
struct RunConfig {
    struct {
        std::string kind = "monomial";  // monomial | tabulated
        double m = 2.0;
        std::string table_path;
    } weight;
    struct {
        double R = 6.0;
        double h = 0.1;
        std::string shape = "square";  // square | disk
    } grid;
    struct {
        double tol = 1e-10;
        int max_iter = 20000;
    } solver;
    struct {
        int k = 40;
        double tol = 1e-8;
    } eigs;
    struct {
        std::string f = "one";  // one | zbar | gaussian | path to CSV
        int K = 10;
        int trials = 100;
    } solve;
    struct {
        std::vector<double> radii{1.0, 2.0, 3.0, 4.0};
        int samples_per_ring = 8;
        double eps_flat = 0.15;
        double divergence_ratio = 4.0;
        double divergence_floor = 10.0;
        double growth_ratio = 1.5;
        double mu_slope_rel = 0.1;
        double small_R_frac = 2.0 / 3.0;
        int deg_k_big = 160;
        int deg_k_small = 120;
        double halfwidth = 0.2;
    } diagnose;
    struct {
        std::string directory = "out";
        std::string formats = "csv,json,dat";
    } output;
    std::uint64_t seed = 0;

    // canonical serialization; cache keys and report hashes derive from it
    std::string canonical() const;
    void set(const std::string& dotted_key, const std::string& value);
};

RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace dbarlab
