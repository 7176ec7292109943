#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "bergman/harness.hpp"

namespace fs = std::filesystem;
using namespace bergman;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
    cmd->add_option("--threads", args.threads, "worker threads for k sweeps (0 = auto)");
    cmd->add_flag("--strict", args.strict, "treat warnings as failures");
}

ExperimentConfig load(const CommonArgs& args) {
    if (!fs::exists(args.config_path))
        throw ConfigError("config file not found: " + args.config_path, 0, 0);
    ExperimentConfig cfg = load_experiment_file(args.config_path);
    return cfg;
}

int effective_threads(int t) {
    if (t > 0) return t;
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

std::string out_of(const CommonArgs& args, const ExperimentConfig& cfg) {
    return args.out_dir.empty() ? cfg.out_dir : args.out_dir;
}

int cmd_model_kernel(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    ModelSpec spec = model_spec_of(cfg);
    std::string dir = out_of(args, cfg);
    fs::create_directories(dir);
    auto grid = kernel_grid(spec.dim(), cfg.grid_radius, cfg.grid_points);
    write_kernel_csv((fs::path(dir) / "model_kernel.csv").string(), spec.dim(), spec.q0, grid,
                     [&](const Point& z, const Point& w) { return model_kernel(spec, z, w); });
    json j{{"n", spec.dim()},
           {"q0", spec.q0},
           {"prefactor", spec.abs_lambda_product() / std::pow(M_PI, spec.dim())},
           {"grid_points", static_cast<int>(grid.size())}};
    std::ofstream(fs::path(dir) / "model_kernel.json") << j.dump(2) << '\n';
    std::cout << "model kernel grid written to " << dir << "\n";
    return 0;
}

int cmd_fock_kernel(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::string dir = out_of(args, cfg);
    fs::create_directories(dir);
    auto grid = kernel_grid(cfg.weight.dim(), cfg.grid_radius, cfg.grid_points);
    json j;
    j["k"] = json::array();
    bool warned = false;
    for (int k : cfg.k_list) {
        GramBasis basis = monomial_gram(cfg.weight, cfg.metric, k, cfg.default_degree_cap(),
                                        cfg.default_quad_order(), cfg.pivot_tol);
        warned = warned || !basis.warnings.empty();
        write_kernel_csv((fs::path(dir) / ("fock_kernel_k" + std::to_string(k) + ".csv")).string(),
                         basis.n, 0, grid, [&](const Point& z, const Point& w) {
                             return gram_scaled_localized(basis, z, w);
                         });
        j["k"].push_back({{"k", k},
                          {"degree_cap", basis.degree_cap},
                          {"quad_order", basis.quad_order},
                          {"retained_dimension", basis.retained_dim()},
                          {"trivialized_diag0", trivialized_diagonal_origin(basis)},
                          {"warnings", basis.warnings}});
    }
    std::ofstream(fs::path(dir) / "fock_kernel.json") << j.dump(2) << '\n';
    std::cout << "fock kernel grids written to " << dir << "\n";
    return (args.strict && warned) ? 1 : 0;
}

int cmd_laplacian_spectrum(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::string dir = out_of(args, cfg);
    fs::create_directories(dir);
    std::vector<std::tuple<int, int, std::vector<double>>> spectra;
    json j;
    j["k"] = json::array();
    for (int k : cfg.k_list) {
        GalerkinKernel gk = make_galerkin_kernel(cfg, k);
        SpectralGap g = spectral_gap(gk.spec, cfg.zero_tol);
        std::vector<double> eigs(gk.spec.eigenvalues.data(),
                                 gk.spec.eigenvalues.data() + gk.spec.eigenvalues.size());
        spectra.emplace_back(k, cfg.q, eigs);
        j["k"].push_back({{"k", k},
                          {"kernel_dim", g.kernel_dim},
                          {"scaled_gap", g.gap},
                          {"unscaled_gap", k * g.gap},
                          {"basis_dim", gk.spec.basis_dim}});
    }
    write_spectrum_csv((fs::path(dir) / "spectrum.csv").string(), spectra);
    std::ofstream(fs::path(dir) / "spectrum.json") << j.dump(2) << '\n';
    std::cout << "spectra written to " << dir << "\n";
    return 0;
}

int cmd_converge(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::string dir = out_of(args, cfg);
    ConvergenceReport rep = convergence_scan(cfg, effective_threads(args.threads));
    fs::create_directories(dir);
    json j;
    j["path"] = rep.path;
    j["signature_match"] = rep.signature_match;
    j["samples"] = json::array();
    for (const auto& s : rep.samples) {
        json js{{"k", s.k}, {"sup_distance", s.sup_distance}, {"scaled_diag0", s.scaled_diag0}};
        if (s.scaled_gap) js["scaled_gap"] = *s.scaled_gap;
        j["samples"].push_back(js);
        std::cout << "k=" << s.k << "  d_k=" << s.sup_distance << "\n";
    }
    if (rep.fit)
        j["diagonal_fit"] = {{"slope", rep.fit->slope}, {"coefficient", rep.fit->coefficient}};
    j["pass"] = rep.pass;
    std::ofstream(fs::path(dir) / "converge.json") << j.dump(2) << '\n';
    bool fail = !rep.pass || (args.strict && !rep.warnings.empty());
    return fail ? 1 : 0;
}

int cmd_gap_scan(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::string dir = out_of(args, cfg);
    GapScan g = gap_scan(cfg, effective_threads(args.threads));
    fs::create_directories(dir);
    json j{{"k", g.k},
           {"scaled_gap", g.scaled_gap},
           {"unscaled_gap", g.unscaled_gap},
           {"kernel_dim", g.kernel_dim},
           {"polynomial_pass", g.polynomial.pass}};
    if (g.exponential) j["exponential_pass"] = g.exponential->pass;
    std::ofstream(fs::path(dir) / "gap_scan.json") << j.dump(2) << '\n';
    std::cout << "polynomial-rate classification: " << (g.polynomial.pass ? "pass" : "fail")
              << "\n";
    return g.polynomial.pass ? 0 : 1;
}

int cmd_run(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::string dir = out_of(args, cfg);
    int rc = run_experiment(cfg, dir, args.strict, effective_threads(args.threads));
    std::cout << "report written to " << dir << (rc == 0 ? " (pass)" : " (FAIL)") << "\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted Bergman / spectral kernel laboratory on C^n"};
    app.require_subcommand(1);

    CommonArgs a_model, a_fock, a_lap, a_conv, a_gap, a_run;
    add_common(app.add_subcommand("model-kernel", "closed-form model kernel on a grid"), a_model);
    add_common(app.add_subcommand("fock-kernel", "finite-k Bergman kernel via weighted Gram"),
               a_fock);
    add_common(app.add_subcommand("laplacian-spectrum", "Galerkin spectrum of the scaled Laplacian"),
               a_lap);
    add_common(app.add_subcommand("converge", "scaled-kernel convergence scan across k"), a_conv);
    add_common(app.add_subcommand("gap-scan", "spectral gap scan and rate classification"), a_gap);
    add_common(app.add_subcommand("run", "full experiment with report and pass/fail criteria"),
               a_run);

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("model-kernel")) return cmd_model_kernel(a_model);
        if (app.got_subcommand("fock-kernel")) return cmd_fock_kernel(a_fock);
        if (app.got_subcommand("laplacian-spectrum")) return cmd_laplacian_spectrum(a_lap);
        if (app.got_subcommand("converge")) return cmd_converge(a_conv);
        if (app.got_subcommand("gap-scan")) return cmd_gap_scan(a_gap);
        if (app.got_subcommand("run")) return cmd_run(a_run);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
