// damgms: fine and multiscale solves of the dam problem from a config file.
//
//   damgms run    --config c.ini [--mode fine|gmsfem] [--li 4]
//   damgms sweep  --config c.ini [--li 1,2,4,6,8,10]
//   damgms basis  --config c.ini [--li 4]
//   damgms check  --config c.ini
//
// Common flags: --out-dir DIR, --seed N. Progress goes to stderr, files to
// the output directory (listed in manifest.json).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "damgms/damgms.hpp"

namespace fs = std::filesystem;
using namespace damgms;

namespace {

constexpr int kExitNotConverged = 3;

struct CommonOptions {
    std::string config;
    std::string mode;
    std::string li;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "experiment config (INI sections; defaults if omitted)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--mode", o.mode, "fine or gmsfem (overrides [solver] mode)");
    cmd->add_option("--li", o.li, "enrichment count(s), comma separated (overrides [gmsfem] li)");
    cmd->add_option("--out-dir", o.out_dir, "output directory (overrides [output] dir)");
    cmd->add_option("--seed", o.seed, "coefficient seed (overrides [coefficient] seed)");
    cmd->add_flag("--quiet", o.quiet, "no per-step log on stderr");
}

ExperimentConfig load(const CommonOptions& o) {
    ExperimentConfig cfg = o.config.empty() ? parse_config_text("", "<defaults>") : parse_config(o.config);
    if (!o.mode.empty()) cfg.solver.mode = detail::parse_mode(o.mode);
    if (!o.li.empty()) {
        // reuse the config parser so --li and [gmsfem] li accept the same syntax
        cfg.li = parse_config_text("[gmsfem]\nli = " + o.li + "\n", "--li").li;
        if (!cfg.li.empty()) cfg.solver.enrichment = cfg.li.front();
    }
    if (!o.out_dir.empty()) cfg.output.dir = o.out_dir;
    if (o.seed) cfg.coefficient.seed = *o.seed;
    return cfg;
}

/// Collects written paths (relative to the output directory) for the manifest.
class Outputs {
public:
    explicit Outputs(const ExperimentConfig& cfg) : dir_(cfg.output.dir), cfg_(cfg) {
        fs::create_directories(dir_);
    }

    std::string path(const std::string& name) {
        files_.push_back(name);
        return (dir_ / name).string();
    }

    void field(const NodalField& f, const FineMesh& mesh, const std::string& stem) {
        if (!cfg_.output.fields) return;
        const FieldFormat fmt = cfg_.output.format;
        if (fmt == FieldFormat::Csv || fmt == FieldFormat::Both) {
            write_field(f, mesh, path(stem + ".csv"), FieldFileFormat::Csv, stem);
        }
        if (fmt == FieldFormat::Vtk || fmt == FieldFormat::Both) {
            write_field(f, mesh, path(stem + ".vtk"), FieldFileFormat::Vtk, stem);
        }
    }

    void manifest(nlohmann::ordered_json body) {
        files_.push_back("manifest.json");
        body["files"] = files_;
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        out << body.dump(2) << '\n';
        if (!out) throw FormatError("cannot write manifest.json");
    }

private:
    fs::path dir_;
    const ExperimentConfig& cfg_;
    std::vector<std::string> files_;
};

nlohmann::ordered_json manifest_head(const ExperimentConfig& cfg, const std::string& command,
                                     const PermeabilityField& kappa) {
    nlohmann::ordered_json m;
    m["command"] = command;
    nlohmann::ordered_json echo;
    for (const auto& [k, v] : cfg.echo()) echo[k] = v;
    m["config"] = echo;
    m["coefficient"] = {{"family", to_string(cfg.coefficient.family)},
                        {"seed", cfg.coefficient.seed},
                        {"min", kappa.min()},
                        {"max", kappa.max()},
                        {"contrast", kappa.contrast()}};
    return m;
}

StepObserver step_logger(const std::string& label, bool quiet) {
    if (quiet) return {};
    return [label](int step, const StepDiagnostics& d) {
        std::fprintf(stderr, "[%s] step %d increment %.6e theta overshoot %.3e\n", label.c_str(), step, d.increment,
                     d.theta_overshoot);
    };
}

nlohmann::ordered_json run_summary(const RunResult& r) {
    return {{"steps", r.steps}, {"converged", r.converged}, {"last_increment", r.last_increment}};
}

struct Setup {
    FineMesh mesh;
    PermeabilityField kappa;
    CoarseMesh coarse;
    DamProblem problem;

    explicit Setup(const ExperimentConfig& cfg)
        : mesh(build_fine_mesh(cfg)),
          kappa(build_coefficient(mesh, cfg.coefficient)),
          coarse(build_coarse_mesh(mesh, cfg.mesh.coarse_nx, cfg.mesh.coarse_ny)),
          problem(mesh, kappa, cfg.solver) {}
};

int cmd_run(const CommonOptions& o) {
    const ExperimentConfig cfg = load(o);
    const Setup s(cfg);
    Outputs out(cfg);
    auto manifest = manifest_head(cfg, "run", s.kappa);
    const auto t0 = std::chrono::steady_clock::now();

    RunResult r;
    std::string tag = "fine";
    if (cfg.solver.mode == Mode::Fine) {
        r = s.problem.run_fine(step_logger("fine", o.quiet));
    } else {
        const int li = cfg.solver.enrichment;
        tag = "gmsfem_Li" + std::to_string(li);
        const CoarseSpace space = build_spectral_basis(s.mesh, s.coarse, s.kappa, enrichment_counts(s.coarse, li),
                                                       s.problem.ops.dirichlet);
        manifest["coarse_dim"] = space.dimension();
        manifest["li"] = li;
        r = s.problem.run_coarse(space, step_logger(tag, o.quiet));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    save_field(s.kappa, out.path("kappa.csv"));
    out.field(r.state.p, s.mesh, "p_" + tag);
    out.field(r.state.theta, s.mesh, "theta_" + tag);
    manifest["mode"] = to_string(cfg.solver.mode);
    manifest["run"] = run_summary(r);
    manifest["seconds"] = seconds;
    out.manifest(manifest);

    std::fprintf(stderr, "%s: %d steps, %s\n", tag.c_str(), r.steps, r.converged ? "converged" : "NOT converged");
    return r.converged ? 0 : kExitNotConverged;
}

int cmd_sweep(const CommonOptions& o) {
    const ExperimentConfig cfg = load(o);
    const Setup s(cfg);
    Outputs out(cfg);
    auto manifest = manifest_head(cfg, "sweep", s.kappa);

    SweepObserver observer;
    if (!o.quiet) {
        observer = [](const std::string& label, int step, const StepDiagnostics& d) {
            std::fprintf(stderr, "[%s] step %d increment %.6e theta overshoot %.3e\n", label.c_str(), step,
                         d.increment, d.theta_overshoot);
        };
    }
    const SweepResult sweep = run_sweep(s.problem, s.coarse, cfg.li, observer);

    write_error_table(sweep.reports, out.path("error_table.csv"));
    save_field(s.kappa, out.path("kappa.csv"));
    out.field(sweep.fine.state.p, s.mesh, "p_fine");
    out.field(sweep.fine.state.theta, s.mesh, "theta_fine");
    for (std::size_t k = 0; k < sweep.coarse.size(); ++k) {
        const std::string tag = "gmsfem_Li" + std::to_string(sweep.reports[k].li);
        out.field(sweep.coarse[k].state.p, s.mesh, "p_" + tag);
        out.field(sweep.coarse[k].state.theta, s.mesh, "theta_" + tag);
    }

    manifest["fine"] = run_summary(sweep.fine);
    manifest["fine"]["seconds"] = sweep.fine_seconds;
    manifest["basis_seconds"] = sweep.basis_seconds;
    auto rows = nlohmann::ordered_json::array();
    bool converged = sweep.fine.converged;
    for (std::size_t k = 0; k < sweep.reports.size(); ++k) {
        const ErrorReport& r = sweep.reports[k];
        rows.push_back({{"li", r.li},
                        {"coarse_dim", r.coarse_dim},
                        {"energy_error_percent", r.energy_error_percent},
                        {"fine_steps", r.fine_steps},
                        {"coarse_steps", r.coarse_steps},
                        {"converged", r.converged},
                        {"seconds", sweep.coarse_seconds[k]}});
        converged = converged && r.converged;
        std::fprintf(stderr, "Li=%d dim=%d error=%.4f%% steps fine/coarse %d/%d\n", r.li, r.coarse_dim,
                     r.energy_error_percent, r.fine_steps, r.coarse_steps);
    }
    manifest["errors"] = rows;
    out.manifest(manifest);
    if (!converged) std::fprintf(stderr, "warning: at least one run hit max_steps without converging\n");
    return converged ? 0 : kExitNotConverged;
}

int cmd_basis(const CommonOptions& o) {
    const ExperimentConfig cfg = load(o);
    const Setup s(cfg);
    Outputs out(cfg);
    auto manifest = manifest_head(cfg, "basis", s.kappa);
    const int li = cfg.solver.enrichment;

    const SpectralBasis basis = prepare_spectral_basis(s.mesh, s.coarse, s.kappa, li);
    const CoarseSpace space = assemble_coarse_space(s.mesh, s.coarse, basis.pu, basis.spectra,
                                                    enrichment_counts(s.coarse, li), s.problem.ops.dirichlet);
    const std::string tag = "Li" + std::to_string(li);
    write_matrix_coo(space.R0, out.path("basis_" + tag + "_R0.csv"));

    {
        std::ofstream ev(out.path("eigenvalues_" + tag + ".csv"), std::ios::binary);
        ev << "coarse_node,l,sigma\n";
        char buf[32];
        for (int n = 0; n < s.coarse.node_count(); ++n) {
            for (Eigen::Index l = 0; l < space.eigenvalues[n].size(); ++l) {
                std::snprintf(buf, sizeof buf, "%.17g", space.eigenvalues[n][l]);
                ev << n << ',' << l << ',' << buf << '\n';
            }
        }
        if (!ev) throw FormatError("cannot write eigenvalues");
    }
    save_field(PermeabilityField(s.mesh.nx(), s.mesh.ny(), basis.weight), out.path("weight.csv"));
    NodalField chi_sum = NodalField::Zero(s.mesh.node_count());
    for (int n = 0; n < s.coarse.node_count(); ++n) chi_sum += basis.pu.expand(s.mesh, s.coarse, n);
    out.field(chi_sum, s.mesh, "chi_sum");

    manifest["li"] = li;
    manifest["coarse_dim"] = space.dimension();
    out.manifest(manifest);
    std::fprintf(stderr, "basis Li=%d: dimension %d\n", li, space.dimension());
    return 0;
}

int cmd_check(const CommonOptions& o) {
    const ExperimentConfig cfg = load(o);
    const Setup s(cfg);
    const int li = *std::max_element(cfg.li.begin(), cfg.li.end());
    const auto results = run_invariant_checks(s.problem, s.coarse, li);
    bool ok = true;
    for (const CheckResult& r : results) {
        std::printf("%s  %-32s %.3e (bound %.1e)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.value, r.bound);
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fine and multiscale (GMsFEM) solver for the free-boundary dam problem"};
    app.require_subcommand(1);
    CommonOptions opts;
    CLI::App* run = app.add_subcommand("run", "steady state in one mode");
    CLI::App* sweep = app.add_subcommand("sweep", "fine reference plus GMsFEM over the Li list, with error table");
    CLI::App* basis = app.add_subcommand("basis", "dump the multiscale basis for one Li");
    CLI::App* check = app.add_subcommand("check", "invariant self-tests on the configured problem");
    for (CLI::App* c : {run, sweep, basis, check}) add_common(c, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(opts);
        if (*sweep) return cmd_sweep(opts);
        if (*basis) return cmd_basis(opts);
        if (*check) return cmd_check(opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "damgms: error: %s\n", e.what());
        return 1;
    }
    return 1;
}
