#pragma once

#include <string>
#include <vector>

#include "dbarlab/grid.hpp"
#include "dbarlab/spectra.hpp"

namespace dbarlab {

// Fields travel as CSV `x,y,re,im`; eigenvalues as `index,lambda,residual,converged`.
void write_field_csv(const std::string& path, const FieldC& f);
FieldC read_field_csv(const std::string& path, const GridPtr& grid);

void write_eigs_csv(const std::string& path, const EigenResult& e);

// gnuplot-ready two-column profile
void write_dat(const std::string& path, const std::vector<std::pair<double, double>>& rows);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace dbarlab
