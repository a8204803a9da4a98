#include "dbarlab/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dbarlab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

double to_num(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_num(key, v);
    if (x != std::floor(x)) throw config_error("config: key '" + key + "' expects an integer");
    return static_cast<int>(x);
}

std::vector<double> to_list(const std::string& key, std::string v) {
    v = trim(v);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw config_error("config: key '" + key + "' expects a list like [1,2,3]");
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_num(key, item));
    }
    if (out.empty()) throw config_error("config: key '" + key + "' list is empty");
    return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = unquote(trim(raw));
    using Setter = std::function<void(RunConfig&, const std::string&)>;
    static const std::map<std::string, Setter> table = {
        {"weight.kind", [](RunConfig& c, const std::string& s) {
             if (s != "monomial" && s != "tabulated")
                 throw config_error("config: weight.kind must be monomial or tabulated");
             c.weight.kind = s;
         }},
        {"weight.m", [](RunConfig& c, const std::string& s) { c.weight.m = to_num("weight.m", s); }},
        {"weight.table_path", [](RunConfig& c, const std::string& s) { c.weight.table_path = s; }},
        {"grid.R", [](RunConfig& c, const std::string& s) {
             c.grid.R = to_num("grid.R", s);
             if (!(c.grid.R > 0)) throw config_error("config: grid.R must be positive");
         }},
        {"grid.h", [](RunConfig& c, const std::string& s) {
             c.grid.h = to_num("grid.h", s);
             if (!(c.grid.h > 0)) throw config_error("config: grid.h must be positive");
         }},
        {"grid.shape", [](RunConfig& c, const std::string& s) {
             if (s != "square" && s != "disk")
                 throw config_error("config: grid.shape must be square or disk");
             c.grid.shape = s;
         }},
        {"solver.tol", [](RunConfig& c, const std::string& s) {
             c.solver.tol = to_num("solver.tol", s);
             if (!(c.solver.tol > 0)) throw config_error("config: solver.tol must be positive");
         }},
        {"solver.max_iter", [](RunConfig& c, const std::string& s) {
             c.solver.max_iter = to_int("solver.max_iter", s);
             if (c.solver.max_iter <= 0) throw config_error("config: solver.max_iter must be positive");
         }},
        {"eigs.k", [](RunConfig& c, const std::string& s) {
             c.eigs.k = to_int("eigs.k", s);
             if (c.eigs.k <= 0) throw config_error("config: eigs.k must be positive");
         }},
        {"eigs.tol", [](RunConfig& c, const std::string& s) {
             c.eigs.tol = to_num("eigs.tol", s);
             if (!(c.eigs.tol > 0)) throw config_error("config: eigs.tol must be positive");
         }},
        {"solve.f", [](RunConfig& c, const std::string& s) { c.solve.f = s; }},
        {"solve.K", [](RunConfig& c, const std::string& s) {
             c.solve.K = to_int("solve.K", s);
             if (c.solve.K < 0) throw config_error("config: solve.K must be >= 0");
         }},
        {"solve.trials", [](RunConfig& c, const std::string& s) {
             c.solve.trials = to_int("solve.trials", s);
             if (c.solve.trials < 0) throw config_error("config: solve.trials must be >= 0");
         }},
        {"diagnose.radii", [](RunConfig& c, const std::string& s) { c.diagnose.radii = to_list("diagnose.radii", s); }},
        {"diagnose.samples_per_ring", [](RunConfig& c, const std::string& s) {
             c.diagnose.samples_per_ring = to_int("diagnose.samples_per_ring", s);
             if (c.diagnose.samples_per_ring <= 0)
                 throw config_error("config: diagnose.samples_per_ring must be positive");
         }},
        {"diagnose.eps_flat", [](RunConfig& c, const std::string& s) { c.diagnose.eps_flat = to_num("diagnose.eps_flat", s); }},
        {"diagnose.divergence_ratio", [](RunConfig& c, const std::string& s) { c.diagnose.divergence_ratio = to_num("diagnose.divergence_ratio", s); }},
        {"diagnose.divergence_floor", [](RunConfig& c, const std::string& s) { c.diagnose.divergence_floor = to_num("diagnose.divergence_floor", s); }},
        {"diagnose.growth_ratio", [](RunConfig& c, const std::string& s) { c.diagnose.growth_ratio = to_num("diagnose.growth_ratio", s); }},
        {"diagnose.mu_slope_rel", [](RunConfig& c, const std::string& s) { c.diagnose.mu_slope_rel = to_num("diagnose.mu_slope_rel", s); }},
        {"diagnose.small_R_frac", [](RunConfig& c, const std::string& s) { c.diagnose.small_R_frac = to_num("diagnose.small_R_frac", s); }},
        {"diagnose.deg_k_big", [](RunConfig& c, const std::string& s) { c.diagnose.deg_k_big = to_int("diagnose.deg_k_big", s); }},
        {"diagnose.deg_k_small", [](RunConfig& c, const std::string& s) { c.diagnose.deg_k_small = to_int("diagnose.deg_k_small", s); }},
        {"diagnose.halfwidth", [](RunConfig& c, const std::string& s) { c.diagnose.halfwidth = to_num("diagnose.halfwidth", s); }},
        {"output.directory", [](RunConfig& c, const std::string& s) { c.output.directory = s; }},
        {"output.formats", [](RunConfig& c, const std::string& s) { c.output.formats = s; }},
        {"seed", [](RunConfig& c, const std::string& s) {
             c.seed = static_cast<std::uint64_t>(to_num("seed", s));
         }},
    };
    const auto it = table.find(key);
    if (it == table.end()) throw config_error("config: unknown key '" + key + "'");
    it->second(*this, v);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config: malformed section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        cfg.set(section.empty() ? key : section + "." + key, val);
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string RunConfig::canonical() const {
    std::ostringstream s;
    s.precision(17);
    s << "weight.kind=" << weight.kind << ";weight.m=" << weight.m
      << ";weight.table_path=" << weight.table_path << ";grid.R=" << grid.R
      << ";grid.h=" << grid.h << ";grid.shape=" << grid.shape
      << ";solver.tol=" << solver.tol << ";solver.max_iter=" << solver.max_iter
      << ";eigs.k=" << eigs.k << ";eigs.tol=" << eigs.tol << ";solve.f=" << solve.f
      << ";solve.K=" << solve.K << ";solve.trials=" << solve.trials
      << ";diagnose.radii=";
    for (double r : diagnose.radii) s << r << ",";
    s << ";diagnose.samples_per_ring=" << diagnose.samples_per_ring
      << ";diagnose.eps_flat=" << diagnose.eps_flat
      << ";diagnose.divergence_ratio=" << diagnose.divergence_ratio
      << ";diagnose.divergence_floor=" << diagnose.divergence_floor
      << ";diagnose.growth_ratio=" << diagnose.growth_ratio
      << ";diagnose.mu_slope_rel=" << diagnose.mu_slope_rel
      << ";diagnose.small_R_frac=" << diagnose.small_R_frac
      << ";diagnose.deg_k_big=" << diagnose.deg_k_big
      << ";diagnose.deg_k_small=" << diagnose.deg_k_small
      << ";diagnose.halfwidth=" << diagnose.halfwidth << ";seed=" << seed;
    return s.str();
}

}  // namespace dbarlab
