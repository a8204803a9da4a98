#include "dbarlab/cli_runner.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <json.hpp>

#include "dbarlab/cache.hpp"
#include "dbarlab/compactness.hpp"
#include "dbarlab/config.hpp"
#include "dbarlab/dbar_solver.hpp"
#include "dbarlab/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dbarlab {

namespace {

struct CliOptions {
    std::string command;
    std::optional<std::string> config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    bool strict = false;
    bool no_cache = false;
    bool export_operator = false;
    int workers = 1;
};

CliOptions parse_args(const std::vector<std::string>& args) {
    CliOptions o;
    if (args.empty()) throw config_error("usage: dbarlab <command> [--config FILE] [--key=value ...]");
    o.command = args[0];
    for (size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--strict") {
            o.strict = true;
        } else if (a == "--no-cache") {
            o.no_cache = true;
        } else if (a == "--export-operator") {
            o.export_operator = true;
        } else if (a.rfind("--workers=", 0) == 0) {
            try {
                o.workers = std::stoi(a.substr(10));
            } catch (const std::exception&) {
                throw config_error("--workers expects an integer, got " + a);
            }
            if (o.workers < 1) throw config_error("--workers must be >= 1");
        } else if (a == "--config") {
            if (++i >= args.size()) throw config_error("--config needs a path");
            o.config_path = args[i];
        } else if (a.rfind("--config=", 0) == 0) {
            o.config_path = a.substr(9);
        } else if (a.rfind("--", 0) == 0) {
            const auto eq = a.find('=');
            if (eq == std::string::npos)
                throw config_error("flag overrides look like --section.key=value, got " + a);
            o.overrides.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
        } else {
            throw config_error("unexpected argument: " + a);
        }
    }
    return o;
}

WeightModel make_weight(const RunConfig& cfg) {
    if (cfg.weight.kind == "monomial") return WeightModel::monomial(cfg.weight.m);
    if (cfg.weight.table_path.empty())
        throw config_error("tabulated weight needs weight.table_path");
    return WeightModel::tabulated_from_csv(cfg.weight.table_path);
}

GridPtr make_grid(const RunConfig& cfg) {
    return build_grid(cfg.grid.R, cfg.grid.h,
                      cfg.grid.shape == "disk" ? GridShape::disk : GridShape::square);
}

ClassifyParams make_params(const RunConfig& cfg, int workers) {
    ClassifyParams p;
    p.workers = workers;
    p.radii = cfg.diagnose.radii;
    p.samples_per_ring = cfg.diagnose.samples_per_ring;
    p.eps_flat = cfg.diagnose.eps_flat;
    p.divergence_ratio = cfg.diagnose.divergence_ratio;
    p.divergence_floor = cfg.diagnose.divergence_floor;
    p.growth_ratio = cfg.diagnose.growth_ratio;
    p.mu_slope_rel = cfg.diagnose.mu_slope_rel;
    p.small_R_frac = cfg.diagnose.small_R_frac;
    p.deg_k_big = cfg.diagnose.deg_k_big;
    p.deg_k_small = cfg.diagnose.deg_k_small;
    p.deg_halfwidth = cfg.diagnose.halfwidth;
    p.eigs_tol = cfg.eigs.tol;
    p.seed = cfg.seed;
    return p;
}

json params_json(const ClassifyParams& p) {
    return json{{"radii", p.radii},
                {"samples_per_ring", p.samples_per_ring},
                {"eps_flat", p.eps_flat},
                {"divergence_ratio", p.divergence_ratio},
                {"divergence_floor", p.divergence_floor},
                {"growth_ratio", p.growth_ratio},
                {"mu_slope_rel", p.mu_slope_rel},
                {"deg_halfwidth", p.deg_halfwidth},
                {"note", "thresholds are tool defaults, recorded so runs are self-describing"}};
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(cfg.canonical())); }

FieldC make_rhs(const RunConfig& cfg, const GridPtr& grid) {
    if (cfg.solve.f == "one") return sample(grid, [](cdouble) { return cdouble(1, 0); });
    if (cfg.solve.f == "zbar") return sample(grid, [](cdouble z) { return std::conj(z); });
    if (cfg.solve.f == "gaussian")
        return sample(grid, [](cdouble z) { return cdouble(std::exp(-std::norm(z)), 0); });
    return read_field_csv(cfg.solve.f, grid);
}

int cmd_weights_check(const RunConfig& cfg, std::ostream& out) {
    const WeightModel w = make_weight(cfg);
    const GridPtr grid = make_grid(cfg);
    double lap_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < grid->n; ++k)
        lap_min = std::min(lap_min, w.laplacian(grid->point(k)));

    std::vector<cdouble> centers{0.0};
    const double reach = std::max(1.0, cfg.grid.R - 2.5);
    for (double rho = 1.0; rho <= reach + 1e-9; rho += 1.0)
        for (int s = 0; s < 4; ++s) centers.push_back(std::polar(rho, s * M_PI / 2));
    const DoublingReport rep = doubling_report(w, centers, {0.5, 1.0}, cfg.grid.h / 2);

    json j{{"weight", w.describe()},
           {"laplacian_min_on_grid", lap_min},
           {"subharmonic_on_samples", lap_min >= -1e-10},
           {"C_hat", rep.C_hat},
           {"delta_hat", rep.delta_hat},
           {"samples", json::array()},
           {"note", "sampled audit, not a certificate"}};
    for (auto& s : rep.samples)
        j["samples"].push_back({{"x", s.z.real()}, {"y", s.z.imag()}, {"r", s.r}, {"ratio", s.ratio}});
    write_file((fs::path(cfg.output.directory) / "weights_check.json").string(), j.dump(2) + "\n");
    out << "weights-check: " << w.describe() << " C_hat=" << rep.C_hat
        << " delta_hat=" << rep.delta_hat << " lap_min=" << lap_min << "\n";
    if (lap_min < -1e-10) return 2;
    return 0;
}

int cmd_eigs(const RunConfig& cfg, bool no_cache, bool export_operator, std::ostream& out) {
    const fs::path dir(cfg.output.directory);
    const std::string key = ResultCache::key_for(
        "eigs|" + cfg.weight.kind + "|" + std::to_string(cfg.weight.m) + "|" +
        cfg.weight.table_path + "|" + std::to_string(cfg.grid.R) + "|" +
        std::to_string(cfg.grid.h) + "|" + cfg.grid.shape + "|" +
        std::to_string(cfg.eigs.k) + "|" + std::to_string(cfg.eigs.tol) + "|" +
        std::to_string(cfg.seed));
    ResultCache cache(resolve_cache_dir(cfg.output.directory), !no_cache);

    if (auto hit = cache.lookup(key)) {
        for (auto& [name, bytes] : *hit) write_file((dir / name).string(), bytes);
        out << "eigs: cache hit " << key << "\n";
        return 0;
    }

    const WeightModel w = make_weight(cfg);
    const GridPtr grid = make_grid(cfg);
    const SparseHermitianOp H = assemble_H(grid, w);
    if (export_operator) export_matrix_market(H.H, (dir / "H.mtx").string());
    const EigenResult e = smallest_eigs(H, cfg.eigs.k, cfg.eigs.tol, cfg.seed);

    write_eigs_csv((dir / "eigs.csv").string(), e);
    const double lambda1 = e.lambdas.size() ? e.lambdas[0] : 0.0;
    json meta{{"tool", kToolVersion},
              {"config_hash", config_hash(cfg)},
              {"cache_key", key},
              {"n", grid->n},
              {"k", cfg.eigs.k},
              {"tol", cfg.eigs.tol},
              {"iterations", e.iterations},
              {"lambda1", lambda1},
              // discrete inverse bound ||u|| <= C_h ||H u||
              {"C_h", lambda1 > 0 ? 1.0 / lambda1 : 0.0},
              {"all_converged", e.all_converged()}};
    write_file((dir / "eigs_meta.json").string(), meta.dump(2) + "\n");
    cache.store(key, {{"eigs.csv", read_file((dir / "eigs.csv").string())},
                      {"eigs_meta.json", read_file((dir / "eigs_meta.json").string())}});
    out << "eigs: k=" << cfg.eigs.k << " lambda1=" << (e.lambdas.size() ? e.lambdas[0] : 0.0)
        << (e.all_converged() ? "" : " (partial)") << "\n";
    return e.all_converged() ? 0 : 2;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const fs::path dir(cfg.output.directory);
    const WeightModel w = make_weight(cfg);
    const GridPtr grid = make_grid(cfg);
    const SparseHermitianOp H = assemble_H(grid, w);
    const FieldC f = make_rhs(cfg, grid);
    const SolveReport rep = canonical_solve(H, f, cfg.solver.tol, cfg.solver.max_iter, cfg.solve.K);
    const double probe = minimality_probe(grid, w, rep, cfg.solve.trials, cfg.seed);

    write_field_csv((dir / "u.csv").string(), rep.u);
    json j{{"tool", kToolVersion},
           {"config_hash", config_hash(cfg)},
           {"f", cfg.solve.f},
           {"residual_rel", rep.residual_rel},
           {"weighted_norm", rep.weighted_norm},
           {"weighted_norm_sq", rep.weighted_norm * rep.weighted_norm},
           {"ortho_defect", rep.ortho_defect},
           {"ortho_K", rep.ortho_K},
           {"cg_iterations", rep.cg_iterations},
           {"minimality_probe", std::isfinite(probe) ? json(probe) : json("no-evidence")},
           {"trials", cfg.solve.trials},
           {"truncation_tail", rep.truncation_tail}};
    write_file((dir / "solve.json").string(), j.dump(2) + "\n");
    out << "solve: residual=" << rep.residual_rel << " |u|_phi=" << rep.weighted_norm
        << " defect=" << rep.ortho_defect << " cg=" << rep.cg_iterations << "\n";
    return 0;
}

json report_to_json(const CompactnessReport& rep) {
    json j{{"verdict", to_string(rep.verdict)},
           {"criteria_fired", rep.criteria_fired},
           {"params", params_json(rep.params)},
           {"mu_profile", json::array()},
           {"mu_slope", rep.mu_profile.slope},
           {"magnetic_integral_profile", json::array()},
           {"laplacian_profile", json::array()},
           {"degeneracy_growth", json::array()},
           {"note", "numerical evidence, not proof"}};
    for (auto& [r, mu] : rep.mu_profile.points) j["mu_profile"].push_back({{"radius", r}, {"mu_hat", mu}});
    for (auto& [r, F] : rep.magnetic_integral_profile)
        j["magnetic_integral_profile"].push_back({{"w_abs", r}, {"F", F}});
    for (auto& [r, l] : rep.laplacian_profile)
        j["laplacian_profile"].push_back({{"radius", r}, {"min_laplacian", l}});
    for (auto& [R, c] : rep.degeneracy_growth)
        j["degeneracy_growth"].push_back({{"R", R}, {"cluster_count", c}});
    return j;
}

int cmd_diagnose(const RunConfig& cfg, bool strict, int workers, std::ostream& out) {
    const fs::path dir(cfg.output.directory);
    const WeightModel w = make_weight(cfg);
    const GridPtr grid = make_grid(cfg);
    const CompactnessReport rep = classify(grid, w, make_params(cfg, workers));

    json j = report_to_json(rep);
    j["tool"] = kToolVersion;
    j["config_hash"] = config_hash(cfg);
    write_file((dir / "diagnose.json").string(), j.dump(2) + "\n");
    write_dat((dir / "mu_profile.dat").string(), rep.mu_profile.points);
    write_dat((dir / "magnetic_integral.dat").string(), rep.magnetic_integral_profile);
    write_dat((dir / "laplacian_profile.dat").string(), rep.laplacian_profile);
    std::vector<std::pair<double, double>> dg;
    for (auto& [R, c] : rep.degeneracy_growth) dg.emplace_back(R, static_cast<double>(c));
    write_dat((dir / "degeneracy_growth.dat").string(), dg);

    out << "diagnose: verdict=" << to_string(rep.verdict) << " fired=[";
    for (size_t i = 0; i < rep.criteria_fired.size(); ++i)
        out << (i ? "," : "") << rep.criteria_fired[i];
    out << "]\n";
    if (strict && rep.verdict == Verdict::Inconclusive) return 3;
    return 0;
}

int cmd_scan_mu(const RunConfig& cfg, int workers, std::ostream& out) {
    const fs::path dir(cfg.output.directory);
    const WeightModel w = make_weight(cfg);
    const GridPtr grid = make_grid(cfg);
    const SparseHermitianOp H = assemble_H(grid, w);
    const MuProfile prof = mu_profile(H, cfg.diagnose.radii, cfg.diagnose.samples_per_ring,
                                      1.0, cfg.eigs.tol, cfg.seed, workers);
    write_dat((dir / "mu_profile.dat").string(), prof.points);
    json j{{"tool", kToolVersion},
           {"config_hash", config_hash(cfg)},
           {"slope", prof.slope},
           {"mean", prof.mean},
           {"points", json::array()}};
    for (auto& [r, mu] : prof.points) j["points"].push_back({{"radius", r}, {"mu_hat", mu}});
    write_file((dir / "scan_mu.json").string(), j.dump(2) + "\n");
    out << "scan-mu: slope=" << prof.slope << " mean=" << prof.mean << "\n";
    return 0;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const fs::path dir(cfg.output.directory);
    json rep{{"tool", kToolVersion}, {"config_hash", config_hash(cfg)}};
    std::vector<std::string> missing;

    const fs::path eigs_meta = dir / "eigs_meta.json";
    const fs::path eigs_csv = dir / "eigs.csv";
    if (fs::exists(eigs_meta) && fs::exists(eigs_csv)) {
        rep["eigs"] = json::parse(read_file(eigs_meta.string()));
    } else {
        missing.push_back("eigs (run `dbarlab eigs`)");
    }
    const fs::path solve_json = dir / "solve.json";
    if (fs::exists(solve_json)) {
        rep["solve"] = json::parse(read_file(solve_json.string()));
    } else {
        missing.push_back("solve (run `dbarlab solve`)");
    }
    const fs::path diag_json = dir / "diagnose.json";
    if (fs::exists(diag_json)) {
        rep["diagnose"] = json::parse(read_file(diag_json.string()));
    } else {
        missing.push_back("diagnose (run `dbarlab diagnose`)");
    }
    if (rep.size() <= 2) {
        json e{{"error", "missing_artifacts"}, {"missing", missing}};
        err << e.dump() << "\n";
        return 1;
    }
    rep["missing"] = missing;
    write_file((dir / "report.json").string(), rep.dump(2) + "\n");

    std::ostringstream table;
    table << "artifact        key                  value\n";
    if (rep.contains("eigs"))
        table << "eigs            lambda1              " << rep["eigs"]["lambda1"] << "\n";
    if (rep.contains("solve")) {
        table << "solve           weighted_norm_sq     " << rep["solve"]["weighted_norm_sq"] << "\n";
        table << "solve           ortho_defect         " << rep["solve"]["ortho_defect"] << "\n";
    }
    if (rep.contains("diagnose"))
        table << "diagnose        verdict              " << rep["diagnose"]["verdict"] << "\n";
    write_file((dir / "report.txt").string(), table.str());
    out << "report: merged " << (3 - missing.size()) << " artifact(s) into report.json\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        const CliOptions o = parse_args(args);
        RunConfig cfg;
        if (o.config_path) cfg = parse_config_file(*o.config_path);
        for (auto& [k, v] : o.overrides) cfg.set(k, v);
        std::error_code ec;
        std::filesystem::create_directories(cfg.output.directory, ec);

        if (o.command == "weights-check") return cmd_weights_check(cfg, out);
        if (o.command == "eigs") return cmd_eigs(cfg, o.no_cache, o.export_operator, out);
        if (o.command == "solve") return cmd_solve(cfg, out);
        if (o.command == "diagnose") return cmd_diagnose(cfg, o.strict, o.workers, out);
        if (o.command == "scan-mu") return cmd_scan_mu(cfg, o.workers, out);
        if (o.command == "report") return cmd_report(cfg, out, err);
        throw config_error("unknown command: " + o.command +
                           " (expected weights-check|eigs|solve|diagnose|scan-mu|report)");
    } catch (const config_error& e) {
        err << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const usage_error& e) {
        err << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const convergence_error& e) {
        err << json{{"error", "non_convergence"},
                    {"message", e.what()},
                    {"achieved_residual", e.achieved_residual}}
                   .dump()
            << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
}

}  // namespace dbarlab
