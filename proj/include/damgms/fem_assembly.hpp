#pragma once

// Q1 assembly on the structured fine mesh: kappa-weighted stiffness and mass,
// the seepage-face boundary mass, the signed vertical-flux boundary mass, and
// the characteristics right-hand side. Element kappa is constant, so the
// fixed 2x2 Gauss rule is exact for every matrix here.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "damgms/grid.hpp"
#include "damgms/permeability.hpp"

namespace damgms {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using NodalField = Eigen::VectorXd;
using Matrix4 = Eigen::Matrix4d;

namespace q1 {

inline constexpr std::array<double, 2> kGaussPoints = {0.5 - 0.5 / 1.7320508075688772,
                                                       0.5 + 0.5 / 1.7320508075688772};
inline constexpr double kGaussWeight = 0.5;

/// Shape values at reference point (xi, eta) in [0,1]^2, tensor node order.
inline std::array<double, 4> shape(double xi, double eta) {
    return {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
}

inline std::array<double, 4> shape_dxi(double eta) { return {-(1 - eta), 1 - eta, -eta, eta}; }
inline std::array<double, 4> shape_deta(double xi) { return {-(1 - xi), -xi, 1 - xi, xi}; }

/// Unit-coefficient stiffness of an h1 x h2 rectangle.
inline Matrix4 element_stiffness(double h1, double h2) {
    Matrix4 k = Matrix4::Zero();
    for (double xi : kGaussPoints) {
        for (double eta : kGaussPoints) {
            const auto dx = shape_dxi(eta);
            const auto dy = shape_deta(xi);
            const double w = kGaussWeight * kGaussWeight * h1 * h2;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    k(a, b) += w * (dx[a] * dx[b] / (h1 * h1) + dy[a] * dy[b] / (h2 * h2));
        }
    }
    return k;
}

inline Matrix4 element_mass(double h1, double h2) {
    Matrix4 m = Matrix4::Zero();
    for (double xi : kGaussPoints) {
        for (double eta : kGaussPoints) {
            const auto n = shape(xi, eta);
            const double w = kGaussWeight * kGaussWeight * h1 * h2;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) m(a, b) += w * n[a] * n[b];
        }
    }
    return m;
}

/// Gradient of a Q1 field at the element centre from its four nodal values.
inline std::array<double, 2> centre_gradient(const std::array<double, 4>& v, double h1, double h2) {
    return {0.5 * ((v[1] - v[0]) + (v[3] - v[2])) / h1, 0.5 * ((v[2] - v[0]) + (v[3] - v[1])) / h2};
}

}  // namespace q1

namespace detail {

inline SparseMatrix assemble_elementwise(const FineMesh& mesh, const std::vector<double>& weights,
                                         const Matrix4& unit) {
    std::vector<Triplet> triplets;
    triplets.reserve(16 * static_cast<std::size_t>(mesh.element_count()));
    for (int e = 0; e < mesh.element_count(); ++e) {
        const auto nodes = mesh.element_nodes(e);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) triplets.emplace_back(nodes[a], nodes[b], weights[e] * unit(a, b));
    }
    SparseMatrix out(mesh.node_count(), mesh.node_count());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

inline void check_field(const FineMesh& mesh, const PermeabilityField& kappa) {
    if (!kappa.matches(mesh)) throw InvalidArgument("permeability field does not match the mesh");
}

}  // namespace detail

/// a_ij = sum_e kappa_e int_e grad phi_i . grad phi_j
inline SparseMatrix assemble_stiffness(const FineMesh& mesh, const PermeabilityField& kappa) {
    detail::check_field(mesh, kappa);
    return detail::assemble_elementwise(mesh, kappa.values(), q1::element_stiffness(mesh.h1(), mesh.h2()));
}

/// m_ij = sum_e kappa_e int_e phi_i phi_j
inline SparseMatrix assemble_weighted_mass(const FineMesh& mesh, const PermeabilityField& kappa) {
    detail::check_field(mesh, kappa);
    return detail::assemble_elementwise(mesh, kappa.values(), q1::element_mass(mesh.h1(), mesh.h2()));
}

namespace detail {

// 1D P1 mass on an edge of length h, scaled.
inline void add_edge_mass(std::vector<Triplet>& t, const BoundaryEdge& edge, double scale) {
    const double d = scale * edge.length / 3.0;
    const double o = scale * edge.length / 6.0;
    t.emplace_back(edge.nodes[0], edge.nodes[0], d);
    t.emplace_back(edge.nodes[1], edge.nodes[1], d);
    t.emplace_back(edge.nodes[0], edge.nodes[1], o);
    t.emplace_back(edge.nodes[1], edge.nodes[0], o);
}

}  // namespace detail

/// int_{seepage} phi_i phi_j
inline SparseMatrix assemble_boundary_mass_seepage(const FineMesh& mesh) {
    std::vector<Triplet> t;
    for (const auto& edge : mesh.boundary_edges()) {
        if (edge.tag == BoundaryTag::Seepage) detail::add_edge_mass(t, edge, 1.0);
    }
    SparseMatrix out(mesh.node_count(), mesh.node_count());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

/// int_{seepage u impervious} phi_i kappa (e2 . n) phi_j. Only top (n = e2)
/// and bottom (n = -e2) edges contribute; kappa from the adjacent element.
inline SparseMatrix assemble_boundary_flux_mass(const FineMesh& mesh, const PermeabilityField& kappa) {
    detail::check_field(mesh, kappa);
    std::vector<Triplet> t;
    for (const auto& edge : mesh.boundary_edges()) {
        if (edge.tag == BoundaryTag::Water) continue;
        double normal2 = 0.0;
        if (edge.side == Side::Top) normal2 = 1.0;
        if (edge.side == Side::Bottom) normal2 = -1.0;
        if (normal2 == 0.0) continue;
        detail::add_edge_mass(t, edge, normal2 * kappa[edge.element]);
    }
    SparseMatrix out(mesh.node_count(), mesh.node_count());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

/// Foot of the characteristic through x for the constant field -g e2,
/// one step back in time. Feet above the top are clamped to x2 = 1.
inline Point characteristic_foot(Point x, double g, double dt) {
    return {x.x1, std::min(x.x2 + g * dt, 1.0)};
}

/// Bilinear interpolation of a nodal field at a point of the closed square.
inline double interpolate(const FineMesh& mesh, const NodalField& field, Point x) {
    const int e = mesh.locate(x);
    const Point o = mesh.element_origin(e);
    const double xi = (x.x1 - o.x1) / mesh.h1();
    const double eta = (x.x2 - o.x2) / mesh.h2();
    const auto n = q1::shape(xi, eta);
    const auto nodes = mesh.element_nodes(e);
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += n[a] * field[nodes[a]];
    return v;
}

/// b_i = (1/dt) int_D (theta kappa)(Phi(x)) phi_i(x) dx with 2x2 Gauss per
/// element. The composed integrand is bilinear theta times the kappa of the
/// element containing the foot point.
inline NodalField assemble_transport_rhs(const FineMesh& mesh, const PermeabilityField& kappa,
                                         const NodalField& theta_prev, double g, double dt) {
    detail::check_field(mesh, kappa);
    if (theta_prev.size() != mesh.node_count()) throw InvalidArgument("saturation field has wrong length");
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    NodalField b = NodalField::Zero(mesh.node_count());
    const double w = q1::kGaussWeight * q1::kGaussWeight * mesh.h1() * mesh.h2() / dt;
    for (int e = 0; e < mesh.element_count(); ++e) {
        const Point o = mesh.element_origin(e);
        const auto nodes = mesh.element_nodes(e);
        for (double xi : q1::kGaussPoints) {
            for (double eta : q1::kGaussPoints) {
                const Point q{o.x1 + xi * mesh.h1(), o.x2 + eta * mesh.h2()};
                const Point foot = characteristic_foot(q, g, dt);
                const double value = interpolate(mesh, theta_prev, foot) * kappa[mesh.locate(foot)];
                const auto n = q1::shape(xi, eta);
                for (int a = 0; a < 4; ++a) b[nodes[a]] += w * value * n[a];
            }
        }
    }
    return b;
}

/// Dense stiffness and mass over a box of fine elements with box-local node
/// numbering, used by the local partition-of-unity and spectral problems.
struct BlockMatrices {
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
};

inline BlockMatrices assemble_block(const FineMesh& mesh, const ElementBox& box,
                                    const std::vector<double>& stiffness_weight,
                                    const std::vector<double>& mass_weight) {
    const Matrix4 k = q1::element_stiffness(mesh.h1(), mesh.h2());
    const Matrix4 m = q1::element_mass(mesh.h1(), mesh.h2());
    const int n = box.node_count();
    BlockMatrices out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    for (int j = box.j0; j < box.j1; ++j) {
        for (int i = box.i0; i < box.i1; ++i) {
            const int e = mesh.element(i, j);
            const std::array<int, 4> local = {box.local_node(i, j), box.local_node(i + 1, j),
                                              box.local_node(i, j + 1), box.local_node(i + 1, j + 1)};
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    out.stiffness(local[a], local[b]) += stiffness_weight[e] * k(a, b);
                    if (!mass_weight.empty()) out.mass(local[a], local[b]) += mass_weight[e] * m(a, b);
                }
            }
        }
    }
    return out;
}

}  // namespace damgms
