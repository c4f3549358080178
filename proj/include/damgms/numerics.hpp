#pragma once

// Linear algebra behind the solvers: a factor-once sparse symmetric solve
// with Dirichlet elimination, and the smallest eigenpairs of the small local
// generalized problems K psi = sigma M psi.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "damgms/errors.hpp"
#include "damgms/fem_assembly.hpp"

namespace damgms {

/// Relative residual contract for every linear solve.
inline constexpr double kSolveTolerance = 1e-10;

/// Sigma x = rhs on the free dofs, x = lift on the constrained ones.
///
/// The reduced matrix is factored once (sparse LDL^T); each solve does one
/// substitution plus at most a few refinement sweeps to meet the residual
/// contract.
class DirichletSolver {
public:
    DirichletSolver(const SparseMatrix& matrix, const std::vector<int>& constrained) : n_(matrix.rows()) {
        if (matrix.rows() != matrix.cols()) throw InvalidArgument("system matrix must be square");
        std::vector<char> fixed(n_, 0);
        for (int d : constrained) {
            if (d < 0 || d >= n_) throw InvalidArgument("Dirichlet dof out of range: " + std::to_string(d));
            fixed[d] = 1;
        }
        index_.assign(n_, -1);
        for (int i = 0; i < n_; ++i) {
            if (fixed[i]) {
                index_[i] = -2 - static_cast<int>(constrained_.size());
                constrained_.push_back(i);
            } else {
                index_[i] = static_cast<int>(free_.size());
                free_.push_back(i);
            }
        }
        std::vector<Triplet> ff;
        std::vector<Triplet> fd;
        for (int col = 0; col < matrix.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
                const int r = index_[it.row()];
                const int c = index_[it.col()];
                if (r < 0) continue;
                if (c >= 0) {
                    ff.emplace_back(r, c, it.value());
                } else {
                    fd.emplace_back(r, -2 - c, it.value());
                }
            }
        }
        reduced_.resize(free_count(), free_count());
        reduced_.setFromTriplets(ff.begin(), ff.end());
        coupling_.resize(free_count(), static_cast<int>(constrained_.size()));
        coupling_.setFromTriplets(fd.begin(), fd.end());
        if (free_count() > 0) {
            factor_.compute(reduced_);
            if (factor_.info() != Eigen::Success) throw SolverError("sparse LDL^T factorization of the reduced system failed");
        }
    }

    int size() const { return n_; }
    int free_count() const { return static_cast<int>(free_.size()); }
    const std::vector<int>& free_dofs() const { return free_; }
    const std::vector<int>& constrained_dofs() const { return constrained_; }
    const SparseMatrix& reduced_matrix() const { return reduced_; }

    /// `lift` is a full-length vector; only its constrained entries are read.
    NodalField solve(const NodalField& rhs, const NodalField& lift) const {
        if (rhs.size() != n_ || lift.size() != n_) throw InvalidArgument("solve: vector length mismatch");
        Eigen::VectorXd fixed(constrained_.size());
        for (std::size_t k = 0; k < constrained_.size(); ++k) fixed[k] = lift[constrained_[k]];
        Eigen::VectorXd r(free_count());
        for (int k = 0; k < free_count(); ++k) r[k] = rhs[free_[k]];
        if (constrained_.size() > 0) r -= coupling_ * fixed;

        Eigen::VectorXd x = Eigen::VectorXd::Zero(free_count());
        if (free_count() > 0) {
            x = factor_.solve(r);
            const double scale = std::max(r.norm(), 1e-300);
            double rel = (r - reduced_ * x).norm() / scale;
            for (int sweep = 0; sweep < 3 && rel > kSolveTolerance; ++sweep) {
                x += factor_.solve(r - reduced_ * x);
                rel = (r - reduced_ * x).norm() / scale;
            }
            if (!(rel <= kSolveTolerance) && r.norm() > 0.0) {
                throw SolverError("reduced solve residual " + std::to_string(rel) + " exceeds " +
                                  std::to_string(kSolveTolerance));
            }
        }
        NodalField out(n_);
        for (int k = 0; k < free_count(); ++k) out[free_[k]] = x[k];
        for (std::size_t k = 0; k < constrained_.size(); ++k) out[constrained_[k]] = fixed[k];
        return out;
    }

private:
    int n_;
    std::vector<int> index_;  // >= 0: free position, <= -2: constrained position (-2 - k)
    std::vector<int> free_;
    std::vector<int> constrained_;
    SparseMatrix reduced_;
    SparseMatrix coupling_;
    Eigen::SimplicialLDLT<SparseMatrix> factor_;
};

struct LinearSystem {
    SparseMatrix matrix;
    NodalField rhs;
    std::vector<int> dirichlet;
    NodalField dirichlet_values;  // full length; read at `dirichlet` entries
};

inline NodalField solve_dirichlet(const LinearSystem& system) {
    return DirichletSolver(system.matrix, system.dirichlet).solve(system.rhs, system.dirichlet_values);
}

/// Ascending eigenvalues with M-orthonormal eigenvectors in the columns.
struct EigenPairs {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;

    int count() const { return static_cast<int>(values.size()); }
};

/// Relative residual bound checked on every returned pair.
inline constexpr double kEigenResidualTolerance = 1e-8;

/// The L smallest pairs of K psi = sigma M psi, K symmetric PSD and M SPD.
///
/// Dense: the local problems have a few hundred dofs. Each eigenvector's
/// largest-magnitude entry is made positive. The residual is measured against
/// max(|K psi|, |K| |psi|) since |K psi| vanishes on the Neumann kernel.
inline EigenPairs smallest_eigenpairs(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M, int L) {
    const int n = static_cast<int>(K.rows());
    if (K.cols() != n || M.rows() != n || M.cols() != n) throw InvalidArgument("eigenproblem: dimension mismatch");
    if (L < 1 || L > n) {
        throw InvalidArgument("requested " + std::to_string(L) + " eigenpairs from a problem with " +
                              std::to_string(n) + " dofs");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(K, M, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) throw SolverError("generalized eigensolver failed (is M positive definite?)");

    EigenPairs out{solver.eigenvalues().head(L), solver.eigenvectors().leftCols(L)};
    const double k_norm = K.cwiseAbs().rowwise().sum().maxCoeff();
    for (int l = 0; l < L; ++l) {
        auto v = out.vectors.col(l);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        const Eigen::VectorXd kv = K * v;
        const double residual = (kv - out.values[l] * (M * v)).norm();
        const double scale = std::max(kv.norm(), k_norm * v.norm());
        if (residual > kEigenResidualTolerance * scale) {
            throw SolverError("eigenpair " + std::to_string(l) + " residual " + std::to_string(residual / scale) +
                              " above tolerance");
        }
    }
    return out;
}

inline EigenPairs smallest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M, int L) {
    return smallest_eigenpairs(Eigen::MatrixXd(K), Eigen::MatrixXd(M), L);
}

}  // namespace damgms
