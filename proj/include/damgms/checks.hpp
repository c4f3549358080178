#pragma once

// Invariant self-tests run by `damgms check`. Each returns the measured
// quantity next to its bound so callers can print or assert on it.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "damgms/driver.hpp"
#include "damgms/duality.hpp"
#include "damgms/fem_assembly.hpp"
#include "damgms/gmsfem.hpp"
#include "damgms/grid.hpp"
#include "damgms/permeability.hpp"

namespace damgms {

struct CheckResult {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool passed = false;
};

inline CheckResult make_check(std::string name, double value, double bound) {
    return {std::move(name), value, bound, value <= bound};
}

/// max over fine nodes of |sum_i chi_i - 1|.
inline double partition_of_unity_defect(const FineMesh& fine, const CoarseMesh& coarse, const PartitionOfUnity& pu) {
    NodalField sum = NodalField::Zero(fine.node_count());
    for (int n = 0; n < coarse.node_count(); ++n) {
        const auto& nodes = coarse.neighborhood(n).nodes;
        for (std::size_t k = 0; k < nodes.size(); ++k) sum[nodes[k]] += pu.chi[n][k];
    }
    return (sum.array() - 1.0).abs().maxCoeff();
}

struct SpectralDefects {
    double max_first_eigenvalue = 0.0;  // max_i sigma_1 over neighborhoods (should vanish)
    double max_orthonormality = 0.0;    // max_i |Psi^T M Psi - I|_max
};

inline SpectralDefects spectral_defects(const FineMesh& fine, const CoarseMesh& coarse, const PermeabilityField& kappa,
                                        const SpectralBasis& basis) {
    SpectralDefects d;
    for (int n = 0; n < coarse.node_count(); ++n) {
        const EigenPairs& pairs = basis.spectra.pairs[n];
        d.max_first_eigenvalue = std::max(d.max_first_eigenvalue, std::abs(pairs.values[0]));
        const BlockMatrices block = assemble_block(fine, coarse.neighborhood(n).box, kappa.values(), basis.weight);
        const Eigen::MatrixXd gram = pairs.vectors.transpose() * block.mass * pairs.vectors;
        const double defect = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
        d.max_orthonormality = std::max(d.max_orthonormality, defect);
    }
    return d;
}

/// Largest violation of "u in G(y) - omega y <=> u = G_lambda^omega(y + lambda u)"
/// over `samples` points: y drawn in [-3, 3] (plus the kinks), u picked from
/// G(y) - omega y, then the Yosida value is compared with u.
inline double yosida_equivalence_defect(bool heaviside, YosidaParams p, int samples, std::uint64_t seed = 0) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        double y = k == 0 ? 0.0 : detail::uniform(rng, -3.0, 3.0);
        if (k % 7 == 1) y = 0.0;
        // element of G(y)
        double gy = 0.0;
        if (heaviside) {
            gy = y > 0.0 ? 1.0 : y < 0.0 ? 0.0 : detail::unit_uniform(rng);
        } else {
            if (y > 0.0) y = -y;  // domain of the indicator subdifferential is (-inf, 0]
            gy = y < 0.0 ? 0.0 : detail::uniform(rng, 0.0, 5.0);
        }
        const double u = gy - p.omega * y;
        const double z = y + p.lambda * u;
        const double v = heaviside ? yosida_heaviside(z, p) : yosida_indicator_nonpositive(z, p);
        worst = std::max(worst, std::abs(v - u));
    }
    return worst;
}

/// The checks run by the CLI on a configured problem.
inline std::vector<CheckResult> run_invariant_checks(const DamProblem& problem, const CoarseMesh& coarse,
                                                     int max_li) {
    std::vector<CheckResult> out;
    const FineMesh& mesh = problem.mesh;

    const SparseMatrix asym = problem.ops.sigma - SparseMatrix(problem.ops.sigma.transpose());
    out.push_back(make_check("system matrix symmetric", asym.norm() / problem.ops.sigma.norm(), 1e-14));

    const PermeabilityField unit = PermeabilityField::constant(mesh, 1.0);
    const NodalField b = assemble_transport_rhs(mesh, unit, NodalField::Ones(mesh.node_count()), problem.config.g,
                                                problem.config.dt);
    out.push_back(make_check("transport rhs mass = 1/dt", std::abs(b.sum() * problem.config.dt - 1.0), 1e-12));

    for (bool h : {true, false}) {
        for (const YosidaParams p : {problem.config.seepage, problem.config.saturation}) {
            out.push_back(make_check(std::string("Yosida equivalence, ") + (h ? "Heaviside" : "indicator"),
                                     yosida_equivalence_defect(h, p, 1000), 1e-14));
        }
    }

    const SpectralBasis basis = prepare_spectral_basis(mesh, coarse, problem.kappa, max_li);
    out.push_back(make_check("partition of unity", partition_of_unity_defect(mesh, coarse, basis.pu), 1e-10));
    const SpectralDefects sd = spectral_defects(mesh, coarse, problem.kappa, basis);
    out.push_back(make_check("Neumann kernel sigma_1", sd.max_first_eigenvalue, 1e-8));
    out.push_back(make_check("eigenvectors M~-orthonormal", sd.max_orthonormality, 1e-8));

    const CoarseSpace space = assemble_coarse_space(mesh, coarse, basis.pu, basis.spectra,
                                                    enrichment_counts(coarse, max_li), problem.ops.dirichlet);
    int expected = 0;
    for (int n = 0; n < coarse.node_count(); ++n) expected += coarse.is_boundary_node(n) ? 1 : max_li;
    out.push_back(make_check("coarse dimension = sum L_i", std::abs(space.dimension() - expected), 0.0));
    return out;
}

}  // namespace damgms
