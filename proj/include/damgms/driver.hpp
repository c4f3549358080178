#pragma once

// Fictitious-time iteration for the dam problem. Each step transports
// theta*kappa along the characteristics, then runs a fixed number of
// duality iterations {pressure solve; alpha update; beta update} and
// recovers theta. The pressure solve is either the fine system or its
// Galerkin projection onto a coarse space.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "damgms/duality.hpp"
#include "damgms/errors.hpp"
#include "damgms/fem_assembly.hpp"
#include "damgms/gmsfem.hpp"
#include "damgms/grid.hpp"
#include "damgms/numerics.hpp"
#include "damgms/permeability.hpp"

namespace damgms {

enum class Mode { Fine, Gmsfem };
enum class InitialSaturation { BelowHeads, Full };

inline const char* to_string(Mode m) { return m == Mode::Fine ? "fine" : "gmsfem"; }

struct SolverConfig {
    double dt = 0.05;
    double g = 1.0;
    // omega * lambda = 0.5 puts the pointwise beta map at multiplier -1 and
    // the iteration cycles without converging; 0.45 does not.
    YosidaParams seepage{0.45, 1.0};     // omega1, lambda1
    YosidaParams saturation{0.45, 1.0};  // omega2, lambda2
    double tolerance = 1e-4;
    int max_steps = 5000;
    int fixed_point_iterations = 10;
    Mode mode = Mode::Fine;
    int enrichment = 1;
    InitialSaturation initial = InitialSaturation::BelowHeads;

    void validate() const {
        if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
        if (!(g >= 0.0)) throw InvalidArgument("g must be nonnegative");
        if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
        if (max_steps < 1) throw InvalidArgument("max_steps must be at least 1");
        if (fixed_point_iterations < 1) throw InvalidArgument("fixed_point_iterations must be at least 1");
        if (enrichment < 1) throw InvalidArgument("enrichment must be at least 1");
        detail::check_params(seepage);
        detail::check_params(saturation);
    }
};

struct DamState {
    NodalField p;
    NodalField theta;
    NodalField beta;
    Eigen::VectorXd alpha;  // one value per entry of DamOperators::seepage_nodes
};

/// Fine matrices and boundary bookkeeping for one mesh, coefficient and
/// (dt, omega) choice. Sigma does not change across the iteration.
struct DamOperators {
    SparseMatrix A;
    SparseMatrix M;
    SparseMatrix M_seepage;
    SparseMatrix M_flux;
    SparseMatrix sigma;      // A + omega2/dt M + omega1 M_seepage + omega2 M_flux
    SparseMatrix beta_load;  // M/dt + M_flux
    std::vector<int> dirichlet;
    std::vector<int> seepage_nodes;  // seepage nodes without Dirichlet data
    NodalField lift;                 // Dirichlet values, zero elsewhere
};

inline DamOperators build_operators(const FineMesh& mesh, const PermeabilityField& kappa, const SolverConfig& cfg) {
    cfg.validate();
    DamOperators ops;
    ops.A = assemble_stiffness(mesh, kappa);
    ops.M = assemble_weighted_mass(mesh, kappa);
    ops.M_seepage = assemble_boundary_mass_seepage(mesh);
    ops.M_flux = assemble_boundary_flux_mass(mesh, kappa);
    const double w1 = cfg.seepage.omega;
    const double w2 = cfg.saturation.omega;
    ops.sigma = ops.A + (w2 / cfg.dt) * ops.M + w1 * ops.M_seepage + w2 * ops.M_flux;
    ops.beta_load = (1.0 / cfg.dt) * ops.M + ops.M_flux;

    ops.dirichlet = boundary_nodes(mesh, BoundaryTag::Water);
    ops.lift = NodalField::Zero(mesh.node_count());
    std::vector<char> fixed(mesh.node_count(), 0);
    for (int n : ops.dirichlet) {
        fixed[n] = 1;
        ops.lift[n] = mesh.head_at(n);
    }
    for (int n : boundary_nodes(mesh, BoundaryTag::Seepage)) {
        if (!fixed[n]) ops.seepage_nodes.push_back(n);
    }
    return ops;
}

/// Pressure solve given the right-hand side of the fine system.
class PressureSolver {
public:
    virtual ~PressureSolver() = default;
    virtual NodalField solve(const NodalField& rhs) const = 0;
};

class FinePressureSolver final : public PressureSolver {
public:
    explicit FinePressureSolver(const DamOperators& ops) : ops_(&ops), solver_(ops.sigma, ops.dirichlet) {}
    NodalField solve(const NodalField& rhs) const override { return solver_.solve(rhs, ops_->lift); }

private:
    const DamOperators* ops_;
    DirichletSolver solver_;
};

class CoarsePressureSolver final : public PressureSolver {
public:
    CoarsePressureSolver(const DamOperators& ops, CoarseSpace space)
        : ops_(&ops), space_(std::move(space)), solver_(space_, ops.sigma) {}
    CoarsePressureSolver(const CoarsePressureSolver&) = delete;
    CoarsePressureSolver& operator=(const CoarsePressureSolver&) = delete;

    NodalField solve(const NodalField& rhs) const override { return solver_.solve(rhs, ops_->lift); }
    const CoarseSpace& space() const { return space_; }
    const CoarseSolver& coarse() const { return solver_; }

private:
    const DamOperators* ops_;
    CoarseSpace space_;
    CoarseSolver solver_;
};

inline DamState initial_state(const FineMesh& mesh, const DamOperators& ops, const SolverConfig& cfg) {
    DamState s;
    s.p = ops.lift;
    s.theta = NodalField::Ones(mesh.node_count());
    if (cfg.initial == InitialSaturation::BelowHeads) {
        const auto& part = mesh.partition();
        for (int n = 0; n < mesh.node_count(); ++n) {
            const Point x = mesh.coord(n);
            const double level = part.head_left + (part.head_right - part.head_left) * x.x1;
            s.theta[n] = x.x2 <= level ? 1.0 : 0.0;
        }
    }
    s.beta = s.theta - cfg.saturation.omega * s.p;
    s.alpha = Eigen::VectorXd::Zero(ops.seepage_nodes.size());
    return s;
}

struct StepDiagnostics {
    double increment = 0.0;  // relative l2 change of p over the step
    double theta_overshoot = 0.0;
    double theta_min_raw = 0.0;
    double theta_max_raw = 1.0;
};

/// One fictitious time step from `state`.
inline StepDiagnostics time_step(const FineMesh& mesh, const PermeabilityField& kappa, const DamOperators& ops,
                                 const PressureSolver& solver, const SolverConfig& cfg, DamState& state) {
    const NodalField b = assemble_transport_rhs(mesh, kappa, state.theta, cfg.g, cfg.dt);
    const NodalField p_old = state.p;
    NodalField alpha_full = NodalField::Zero(mesh.node_count());
    for (int k = 0; k < cfg.fixed_point_iterations; ++k) {
        for (std::size_t s = 0; s < ops.seepage_nodes.size(); ++s) alpha_full[ops.seepage_nodes[s]] = state.alpha[s];
        const NodalField rhs = b - ops.beta_load * state.beta - ops.M_seepage * alpha_full;
        state.p = solver.solve(rhs);
        state.alpha = update_alpha(state.p, ops.seepage_nodes, state.alpha, cfg.seepage);
        state.beta = update_beta(state.p, state.beta, cfg.saturation);
    }
    const ThetaRecovery rec = recover_theta(state.p, state.beta, cfg.saturation.omega);
    state.theta = rec.theta;

    StepDiagnostics d;
    d.increment = (state.p - p_old).norm() / std::max(p_old.norm(), 1e-300);
    d.theta_overshoot = rec.overshoot;
    d.theta_min_raw = rec.min_raw;
    d.theta_max_raw = rec.max_raw;
    return d;
}

struct RunResult {
    DamState state;
    int steps = 0;
    bool converged = false;
    double last_increment = 0.0;
    StepDiagnostics last_step;
};

using StepObserver = std::function<void(int step, const StepDiagnostics&)>;

inline RunResult run_to_steady(const FineMesh& mesh, const PermeabilityField& kappa, const DamOperators& ops,
                               const PressureSolver& solver, const SolverConfig& cfg, DamState start,
                               const StepObserver& observer = {}) {
    cfg.validate();
    RunResult r;
    r.state = std::move(start);
    for (int n = 1; n <= cfg.max_steps; ++n) {
        r.last_step = time_step(mesh, kappa, ops, solver, cfg, r.state);
        r.steps = n;
        r.last_increment = r.last_step.increment;
        if (observer) observer(n, r.last_step);
        if (r.last_step.increment < cfg.tolerance) {
            r.converged = true;
            break;
        }
    }
    return r;
}

/// 100 sqrt(e^T A e / p^T A p), e = p_fine - p_coarse.
inline double energy_error(const NodalField& p_fine, const NodalField& p_coarse, const SparseMatrix& A) {
    const NodalField e = p_fine - p_coarse;
    const double num = e.dot(A * e);
    const double den = p_fine.dot(A * p_fine);
    if (!(den > 0.0)) throw InvalidArgument("energy norm of the reference pressure is zero");
    return 100.0 * std::sqrt(std::max(num, 0.0) / den);
}

/// One row of the error table.
struct ErrorReport {
    int li = 0;
    int coarse_dim = 0;
    double energy_error_percent = 0.0;
    int fine_steps = 0;
    int coarse_steps = 0;
    bool converged = false;
};

/// One-shot solve of a full problem in the configured mode.
struct DamProblem {
    FineMesh mesh;
    PermeabilityField kappa;
    SolverConfig config;
    DamOperators ops;

    DamProblem(FineMesh m, PermeabilityField k, SolverConfig cfg)
        : mesh(std::move(m)), kappa(std::move(k)), config(cfg), ops(build_operators(mesh, kappa, config)) {}

    RunResult run_fine(const StepObserver& observer = {}) const {
        const FinePressureSolver solver(ops);
        return run_to_steady(mesh, kappa, ops, solver, config, initial_state(mesh, ops, config), observer);
    }

    RunResult run_coarse(const CoarseSpace& space, const StepObserver& observer = {}) const {
        const CoarsePressureSolver solver(ops, space);
        return run_to_steady(mesh, kappa, ops, solver, config, initial_state(mesh, ops, config), observer);
    }
};

/// Fine reference plus one coarse run per entry of `li`, all from the same
/// initial state. The spectral basis is computed once for max(li).
struct SweepResult {
    RunResult fine;
    std::vector<RunResult> coarse;
    std::vector<ErrorReport> reports;
    double fine_seconds = 0.0;
    double basis_seconds = 0.0;
    std::vector<double> coarse_seconds;
};

using SweepObserver = std::function<void(const std::string& label, int step, const StepDiagnostics&)>;

inline SweepResult run_sweep(const DamProblem& problem, const CoarseMesh& coarse, const std::vector<int>& li,
                             const SweepObserver& observer = {}) {
    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); };
    auto forward = [&](const std::string& label) -> StepObserver {
        if (!observer) return {};
        return [&observer, label](int step, const StepDiagnostics& d) { observer(label, step, d); };
    };

    SweepResult out;
    auto t0 = clock::now();
    out.fine = problem.run_fine(forward("fine"));
    out.fine_seconds = seconds_since(t0);
    if (li.empty()) return out;

    t0 = clock::now();
    const int max_li = *std::max_element(li.begin(), li.end());
    const SpectralBasis basis = prepare_spectral_basis(problem.mesh, coarse, problem.kappa, max_li);
    out.basis_seconds = seconds_since(t0);

    for (int l : li) {
        t0 = clock::now();
        const CoarseSpace space = assemble_coarse_space(problem.mesh, coarse, basis.pu, basis.spectra,
                                                        enrichment_counts(coarse, l), problem.ops.dirichlet);
        RunResult r = problem.run_coarse(space, forward("gmsfem Li=" + std::to_string(l)));
        ErrorReport rep;
        rep.li = l;
        rep.coarse_dim = space.dimension();
        rep.energy_error_percent = energy_error(out.fine.state.p, r.state.p, problem.ops.A);
        rep.fine_steps = out.fine.steps;
        rep.coarse_steps = r.steps;
        rep.converged = out.fine.converged && r.converged;
        out.reports.push_back(rep);
        out.coarse.push_back(std::move(r));
        out.coarse_seconds.push_back(seconds_since(t0));
    }
    return out;
}

}  // namespace damgms
