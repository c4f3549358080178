#pragma once

// Generalized multiscale coarse space: a kappa-harmonic partition of unity
// chi_i, spectral enrichment from local Neumann eigenproblems weighted by
// kappa~ = kappa sum_j H^2 |grad chi_j|^2, and the Galerkin coarse operator
// S0 = R0^T Sigma R0 with columns chi_i psi_l of R0.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "damgms/errors.hpp"
#include "damgms/fem_assembly.hpp"
#include "damgms/grid.hpp"
#include "damgms/numerics.hpp"
#include "damgms/permeability.hpp"

namespace damgms {

/// chi_i stored over the fine nodes of neighborhood i (box-local order).
struct PartitionOfUnity {
    std::vector<Eigen::VectorXd> chi;

    NodalField expand(const FineMesh& fine, const CoarseMesh& coarse, int i) const {
        NodalField out = NodalField::Zero(fine.node_count());
        const auto& nodes = coarse.neighborhood(i).nodes;
        for (std::size_t k = 0; k < nodes.size(); ++k) out[nodes[k]] = chi[i][k];
        return out;
    }
};

namespace detail {

// Bilinear hat of a cell corner evaluated at a box-local fine node.
inline double corner_hat(int corner, int li, int lj, int m1, int m2) {
    const double xi = static_cast<double>(li) / m1;
    const double eta = static_cast<double>(lj) / m2;
    const double fx = (corner & 1) ? xi : 1.0 - xi;
    const double fy = (corner & 2) ? eta : 1.0 - eta;
    return fx * fy;
}

}  // namespace detail

/// Per coarse cell, four fine Dirichlet problems -div(kappa grad chi) = 0 with
/// the bilinear hats of the cell corners as boundary data.
inline PartitionOfUnity build_partition_of_unity(const FineMesh& fine, const CoarseMesh& coarse,
                                                 const PermeabilityField& kappa) {
    if (!kappa.matches(fine)) throw InvalidArgument("permeability field does not match the fine mesh");
    PartitionOfUnity pu;
    pu.chi.resize(coarse.node_count());
    for (int n = 0; n < coarse.node_count(); ++n) pu.chi[n] = Eigen::VectorXd::Zero(coarse.neighborhood(n).nodes.size());

    const int m1 = coarse.fine_per_cell_x();
    const int m2 = coarse.fine_per_cell_y();
    for (int c = 0; c < coarse.cell_count(); ++c) {
        const ElementBox box = coarse.cell_box(c);
        const Eigen::MatrixXd K = assemble_block(fine, box, kappa.values(), {}).stiffness;

        std::vector<int> inner;
        std::vector<int> outer;
        for (int lj = 0; lj <= m2; ++lj)
            for (int li = 0; li <= m1; ++li) {
                const bool on_edge = li == 0 || lj == 0 || li == m1 || lj == m2;
                (on_edge ? outer : inner).push_back(lj * (m1 + 1) + li);
            }

        Eigen::MatrixXd Kii(inner.size(), inner.size());
        Eigen::MatrixXd Kio(inner.size(), outer.size());
        for (std::size_t a = 0; a < inner.size(); ++a) {
            for (std::size_t b = 0; b < inner.size(); ++b) Kii(a, b) = K(inner[a], inner[b]);
            for (std::size_t b = 0; b < outer.size(); ++b) Kio(a, b) = K(inner[a], outer[b]);
        }
        Eigen::LLT<Eigen::MatrixXd> factor;
        if (!inner.empty()) {
            factor.compute(Kii);
            if (factor.info() != Eigen::Success) throw SolverError("local partition-of-unity system is singular");
        }

        const auto corners = coarse.cell_nodes(c);
        for (int corner = 0; corner < 4; ++corner) {
            Eigen::VectorXd local(box.node_count());
            Eigen::VectorXd g(outer.size());
            for (std::size_t b = 0; b < outer.size(); ++b) {
                const int idx = outer[b];
                g[b] = detail::corner_hat(corner, idx % (m1 + 1), idx / (m1 + 1), m1, m2);
                local[idx] = g[b];
            }
            if (!inner.empty()) {
                const Eigen::VectorXd u = factor.solve(-Kio * g);
                for (std::size_t a = 0; a < inner.size(); ++a) local[inner[a]] = u[a];
            }
            const int node = corners[corner];
            const Neighborhood& hood = coarse.neighborhood(node);
            for (int lj = 0; lj <= m2; ++lj) {
                for (int li = 0; li <= m1; ++li) {
                    const int i = box.i0 + li;
                    const int j = box.j0 + lj;
                    pu.chi[node][hood.box.local_node(i, j)] = local[lj * (m1 + 1) + li];
                }
            }
        }
    }
    return pu;
}

/// kappa~_e = kappa_e sum_j H^2 |grad chi_j(centre of e)|^2, floored at
/// 1e-14 times its maximum.
inline std::vector<double> compute_weight(const FineMesh& fine, const CoarseMesh& coarse,
                                          const PermeabilityField& kappa, const PartitionOfUnity& pu) {
    const double H2 = coarse.H() * coarse.H();
    std::vector<double> weight(fine.element_count(), 0.0);
    for (int e = 0; e < fine.element_count(); ++e) {
        const int i = e % fine.nx();
        const int j = e / fine.nx();
        double sum = 0.0;
        for (int node : coarse.cell_nodes(coarse.cell_of_fine_element(fine, e))) {
            const ElementBox& box = coarse.neighborhood(node).box;
            const auto& chi = pu.chi[node];
            const std::array<double, 4> v = {chi[box.local_node(i, j)], chi[box.local_node(i + 1, j)],
                                             chi[box.local_node(i, j + 1)], chi[box.local_node(i + 1, j + 1)]};
            const auto grad = q1::centre_gradient(v, fine.h1(), fine.h2());
            sum += grad[0] * grad[0] + grad[1] * grad[1];
        }
        weight[e] = kappa[e] * H2 * sum;
    }
    const double top = *std::max_element(weight.begin(), weight.end());
    if (!(top > 0.0)) throw SolverError("spectral weight vanishes everywhere");
    for (double& w : weight) w = std::max(w, 1e-14 * top);
    return weight;
}

/// L_i = `interior` at interior coarse nodes and 1 on the coarse boundary.
inline std::vector<int> enrichment_counts(const CoarseMesh& coarse, int interior) {
    if (interior < 1) throw InvalidArgument("enrichment count must be at least 1");
    std::vector<int> counts(coarse.node_count());
    for (int n = 0; n < coarse.node_count(); ++n) counts[n] = coarse.is_boundary_node(n) ? 1 : interior;
    return counts;
}

/// Local Neumann eigenproblems, one per neighborhood, each holding at least
/// as many pairs as any coarse space built from it will use.
struct LocalSpectra {
    std::vector<EigenPairs> pairs;
};

inline LocalSpectra compute_local_spectra(const FineMesh& fine, const CoarseMesh& coarse,
                                          const PermeabilityField& kappa, const std::vector<double>& weight,
                                          const std::vector<int>& counts) {
    if (static_cast<int>(counts.size()) != coarse.node_count()) {
        throw InvalidArgument("need one enrichment count per coarse node");
    }
    LocalSpectra out;
    out.pairs.reserve(coarse.node_count());
    for (int n = 0; n < coarse.node_count(); ++n) {
        const Neighborhood& hood = coarse.neighborhood(n);
        if (counts[n] < 1 || counts[n] > hood.box.node_count()) {
            throw InvalidArgument("enrichment count " + std::to_string(counts[n]) + " invalid for neighborhood with " +
                                  std::to_string(hood.box.node_count()) + " dofs");
        }
        const BlockMatrices block = assemble_block(fine, hood.box, kappa.values(), weight);
        out.pairs.push_back(smallest_eigenpairs(block.stiffness, block.mass, counts[n]));
    }
    return out;
}

/// Columns of R0 grouped by coarse node; rows at Dirichlet dofs are zero.
struct CoarseSpace {
    SparseMatrix R0;
    std::vector<int> counts;
    std::vector<int> offsets;  // first column of each coarse node's block
    std::vector<Eigen::VectorXd> eigenvalues;

    int dimension() const { return static_cast<int>(R0.cols()); }
};

inline CoarseSpace assemble_coarse_space(const FineMesh& fine, const CoarseMesh& coarse, const PartitionOfUnity& pu,
                                         const LocalSpectra& spectra, const std::vector<int>& counts,
                                         const std::vector<int>& dirichlet) {
    std::vector<char> fixed(fine.node_count(), 0);
    for (int d : dirichlet) fixed[d] = 1;
    CoarseSpace space;
    space.counts = counts;
    std::vector<Triplet> t;
    int column = 0;
    for (int n = 0; n < coarse.node_count(); ++n) {
        const EigenPairs& pairs = spectra.pairs.at(n);
        if (counts[n] < 1 || counts[n] > pairs.count()) {
            throw InvalidArgument("coarse node " + std::to_string(n) + " asks for " + std::to_string(counts[n]) +
                                  " basis functions, " + std::to_string(pairs.count()) + " available");
        }
        space.offsets.push_back(column);
        space.eigenvalues.push_back(pairs.values.head(counts[n]));
        const auto& nodes = coarse.neighborhood(n).nodes;
        for (int l = 0; l < counts[n]; ++l, ++column) {
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                if (fixed[nodes[k]]) continue;
                const double v = pu.chi[n][k] * pairs.vectors(k, l);
                if (v != 0.0) t.emplace_back(nodes[k], column, v);
            }
        }
    }
    space.R0.resize(fine.node_count(), column);
    space.R0.setFromTriplets(t.begin(), t.end());
    return space;
}

/// Everything the multiscale solve needs, built once per coefficient.
struct SpectralBasis {
    PartitionOfUnity pu;
    std::vector<double> weight;
    LocalSpectra spectra;
};

inline SpectralBasis prepare_spectral_basis(const FineMesh& fine, const CoarseMesh& coarse,
                                            const PermeabilityField& kappa, int max_count) {
    SpectralBasis b;
    b.pu = build_partition_of_unity(fine, coarse, kappa);
    b.weight = compute_weight(fine, coarse, kappa, b.pu);
    std::vector<int> counts(coarse.node_count());
    for (int n = 0; n < coarse.node_count(); ++n) counts[n] = std::min(max_count, coarse.neighborhood(n).box.node_count());
    b.spectra = compute_local_spectra(fine, coarse, kappa, b.weight, counts);
    return b;
}

inline CoarseSpace build_spectral_basis(const FineMesh& fine, const CoarseMesh& coarse,
                                        const PermeabilityField& kappa, const std::vector<int>& counts,
                                        const std::vector<int>& dirichlet) {
    const int max_count = *std::max_element(counts.begin(), counts.end());
    const SpectralBasis b = prepare_spectral_basis(fine, coarse, kappa, max_count);
    return assemble_coarse_space(fine, coarse, b.pu, b.spectra, counts, dirichlet);
}

/// Degenerate space spanned by the free fine dofs (R0 = I without the
/// Dirichlet columns).
inline CoarseSpace identity_space(int node_count, const std::vector<int>& dirichlet) {
    std::vector<char> fixed(node_count, 0);
    for (int d : dirichlet) fixed[d] = 1;
    CoarseSpace space;
    std::vector<Triplet> t;
    int column = 0;
    for (int n = 0; n < node_count; ++n) {
        if (!fixed[n]) t.emplace_back(n, column++, 1.0);
    }
    space.R0.resize(node_count, column);
    space.R0.setFromTriplets(t.begin(), t.end());
    space.counts.assign(column, 1);
    return space;
}

inline NodalField prolong(const CoarseSpace& space, const Eigen::VectorXd& p0, const NodalField& lift) {
    if (p0.size() != space.dimension() || lift.size() != space.R0.rows()) throw InvalidArgument("prolong: size mismatch");
    return space.R0 * p0 + lift;
}

/// S0 = R0^T Sigma R0, factored once; c0 = R0^T (rhs - Sigma lift).
class CoarseSolver {
public:
    CoarseSolver(const CoarseSpace& space, const SparseMatrix& sigma) : space_(&space), sigma_(&sigma) {
        if (sigma.rows() != space.R0.rows()) throw InvalidArgument("coarse solver: operator/space mismatch");
        S0_ = SparseMatrix(space.R0.transpose() * (sigma * space.R0));
        S0_.prune(0.0);
        factor_.compute(S0_);
        if (factor_.info() != Eigen::Success) throw SolverError("coarse factorization failed");
        const Eigen::VectorXd d = factor_.vectorD().cwiseAbs();
        smallest_pivot_ = d.size() ? d.minCoeff() : 0.0;
        if (d.size() && !(smallest_pivot_ > 1e-14 * d.maxCoeff())) {
            throw SolverError("coarse operator is rank deficient, smallest pivot " + std::to_string(smallest_pivot_));
        }
    }

    const SparseMatrix& matrix() const { return S0_; }
    double smallest_pivot() const { return smallest_pivot_; }

    Eigen::VectorXd coarse_rhs(const NodalField& rhs, const NodalField& lift) const {
        return space_->R0.transpose() * (rhs - *sigma_ * lift);
    }

    Eigen::VectorXd solve_coarse(const Eigen::VectorXd& c0) const {
        Eigen::VectorXd x = factor_.solve(c0);
        const double scale = std::max(c0.norm(), 1e-300);
        double rel = (c0 - S0_ * x).norm() / scale;
        for (int sweep = 0; sweep < 3 && rel > kSolveTolerance; ++sweep) {
            x += factor_.solve(c0 - S0_ * x);
            rel = (c0 - S0_ * x).norm() / scale;
        }
        if (!(rel <= kSolveTolerance) && c0.norm() > 0.0) {
            throw SolverError("coarse solve residual " + std::to_string(rel) + " exceeds tolerance");
        }
        return x;
    }

    NodalField solve(const NodalField& rhs, const NodalField& lift) const {
        return prolong(*space_, solve_coarse(coarse_rhs(rhs, lift)), lift);
    }

private:
    const CoarseSpace* space_;
    const SparseMatrix* sigma_;
    SparseMatrix S0_;
    Eigen::SimplicialLDLT<SparseMatrix> factor_;
    double smallest_pivot_ = 0.0;
};

}  // namespace damgms
