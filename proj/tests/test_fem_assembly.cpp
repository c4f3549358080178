#include <gtest/gtest.h>

#include "damgms/fem_assembly.hpp"

using namespace damgms;

namespace {

double total(const SparseMatrix& m) { return Eigen::MatrixXd(m).sum(); }

double asymmetry(const SparseMatrix& m) {
    return (m - SparseMatrix(m.transpose())).norm() / std::max(m.norm(), 1e-300);
}

// int hat_i(x) x^k dx over [0, 1] for the 1D hat at node x_i, k = 0, 1.
std::array<double, 2> hat_moments(double xi, double h, bool has_left, bool has_right) {
    std::array<double, 2> m{0.0, 0.0};
    if (has_left) {
        m[0] += 0.5 * h;
        m[1] += 0.5 * h * (xi - h / 3.0);
    }
    if (has_right) {
        m[0] += 0.5 * h;
        m[1] += 0.5 * h * (xi + h / 3.0);
    }
    return m;
}

}  // namespace

TEST(ElementMatrices, UnitSquareStiffness) {
    const Matrix4 k = q1::element_stiffness(1.0, 1.0);
    // tensor order: 0-1 and 0-2 share an edge, 0-3 are opposite
    for (int a = 0; a < 4; ++a) EXPECT_NEAR(k(a, a), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(k(0, 1), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(k(0, 2), -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(k(0, 3), -1.0 / 3.0, 1e-15);
    EXPECT_NEAR(k(1, 2), -1.0 / 3.0, 1e-15);
    EXPECT_LT(k.rowwise().sum().cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(ElementMatrices, MassEntries) {
    const Matrix4 m = q1::element_mass(0.5, 0.25);
    const double area = 0.125;
    EXPECT_NEAR(m.sum(), area, 1e-16);
    EXPECT_NEAR(m(0, 0), area / 9.0, 1e-16);
    EXPECT_NEAR(m(0, 1), area / 18.0, 1e-16);
    EXPECT_NEAR(m(0, 3), area / 36.0, 1e-16);
}

TEST(Stiffness, SingleElementMatchesReference) {
    const FineMesh m = build_fine_mesh(1, 1);
    const Eigen::MatrixXd a(assemble_stiffness(m, PermeabilityField::constant(m, 1.0)));
    EXPECT_LT((a - Eigen::MatrixXd(q1::element_stiffness(1.0, 1.0))).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Stiffness, ConstantsInKernelAndScaling) {
    const FineMesh m = build_fine_mesh(30, 20);
    const auto kappa = gen_channels_and_inclusions(m, 2, InclusionFieldSpec{}, 1.0, 100.0);
    const SparseMatrix a = assemble_stiffness(m, kappa);
    EXPECT_LT((a * NodalField::Constant(m.node_count(), 3.0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(asymmetry(a), 1e-13);
    const SparseMatrix scaled = assemble_stiffness(m, kappa.scaled(4.0));
    EXPECT_EQ((scaled - 4.0 * a).norm(), 0.0);
}

TEST(Stiffness, RejectsMismatchedField) {
    const FineMesh m = build_fine_mesh(4, 4);
    const FineMesh other = build_fine_mesh(5, 4);
    EXPECT_THROW(assemble_stiffness(m, PermeabilityField::constant(other, 1.0)), InvalidArgument);
}

TEST(WeightedMass, TotalMass) {
    const FineMesh m = build_fine_mesh(25, 25);
    EXPECT_NEAR(total(assemble_weighted_mass(m, PermeabilityField::constant(m, 1.0))), 1.0, 1e-13);
    EXPECT_NEAR(total(assemble_weighted_mass(m, PermeabilityField::constant(m, 7.0))), 7.0, 1e-12);

    const auto kappa = gen_horizontal_channels(m, default_horizontal_channels(), 1.0, 100.0);
    double expected = 0.0;
    for (double v : kappa.values()) expected += v * m.h1() * m.h2();
    const SparseMatrix mass = assemble_weighted_mass(m, kappa);
    EXPECT_NEAR(total(mass), expected, 1e-12 * expected);
    EXPECT_LT(asymmetry(mass), 1e-13);
}

TEST(SeepageMass, DefaultPartitionTotalsPerimeterPortion) {
    const FineMesh m = build_fine_mesh(40, 40);
    const SparseMatrix s = assemble_boundary_mass_seepage(m);
    EXPECT_NEAR(total(s), 2.0, 1e-13);
    EXPECT_LT(asymmetry(s), 1e-13);
    const auto seep = boundary_nodes(m, BoundaryTag::Seepage);
    for (int col = 0; col < s.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(s, col); it; ++it) {
            EXPECT_TRUE(std::binary_search(seep.begin(), seep.end(), static_cast<int>(it.row())));
        }
    }
}

TEST(SeepageMass, EmptyWhenNoSeepageFace) {
    const FineMesh m = build_fine_mesh(10, 10, BoundaryPartition::submerged());
    EXPECT_EQ(assemble_boundary_mass_seepage(m).nonZeros(), 0);
}

TEST(SeepageMass, SingleEdgeBlock) {
    // top-right corner element of a 4x4 mesh: the top edge between (3,4) and (4,4)
    const FineMesh m = build_fine_mesh(4, 4);
    const Eigen::MatrixXd s(assemble_boundary_mass_seepage(m));
    const double h = 0.25;
    const int a = m.node(1, 4);
    const int b = m.node(2, 4);
    EXPECT_NEAR(s(a, a), 2.0 * h / 3.0, 1e-15);  // shared by two top edges
    EXPECT_NEAR(s(a, b), h / 6.0, 1e-15);
    const int c = m.node(4, 3);
    const int d = m.node(4, 4);
    EXPECT_NEAR(s(c, d), h / 6.0, 1e-15);
    EXPECT_NEAR(s(d, d), 2.0 * h / 3.0, 1e-15);  // corner: top edge and right edge
}

TEST(FluxMass, SignedLengths) {
    const FineMesh m = build_fine_mesh(20, 20);
    const SparseMatrix f = assemble_boundary_flux_mass(m, PermeabilityField::constant(m, 1.0));
    EXPECT_NEAR(total(f), 0.0, 1e-13);
    EXPECT_LT(asymmetry(f), 1e-13);
    // lateral interior nodes carry nothing
    const Eigen::MatrixXd dense(f);
    for (int j = 1; j < 20; ++j) {
        EXPECT_EQ(dense.row(m.node(0, j)).cwiseAbs().sum(), 0.0);
        EXPECT_EQ(dense.row(m.node(20, j)).cwiseAbs().sum(), 0.0);
    }
}

TEST(FluxMass, BottomEdgeBlock) {
    const FineMesh m = build_fine_mesh(4, 4);
    std::vector<double> values(16, 1.0);
    values[m.element(1, 0)] = 5.0;
    const PermeabilityField kappa(4, 4, values);
    const Eigen::MatrixXd f(assemble_boundary_flux_mass(m, kappa));
    const double h = 0.25;
    EXPECT_NEAR(f(m.node(1, 0), m.node(2, 0)), -5.0 * h / 6.0, 1e-15);
    EXPECT_NEAR(f(m.node(2, 0), m.node(2, 0)), -(5.0 + 1.0) * h / 3.0, 1e-15);
    // top edges are seepage: positive
    EXPECT_NEAR(f(m.node(1, 4), m.node(2, 4)), h / 6.0, 1e-15);
}

TEST(CharacteristicFoot, Examples) {
    const Point a = characteristic_foot({0.5, 0.5}, 1.0, 0.1);
    EXPECT_DOUBLE_EQ(a.x1, 0.5);
    EXPECT_NEAR(a.x2, 0.6, 1e-15);
    const Point b = characteristic_foot({0.37, 0.81}, 1.0, 0.0);
    EXPECT_EQ(b.x1, 0.37);
    EXPECT_EQ(b.x2, 0.81);
    const Point c = characteristic_foot({0.3, 0.95}, 1.0, 0.1);
    EXPECT_DOUBLE_EQ(c.x1, 0.3);
    EXPECT_EQ(c.x2, 1.0);
}

TEST(TransportRhs, ConstantFieldMass) {
    const FineMesh m = build_fine_mesh(30, 30);
    const double dt = 0.07;
    const NodalField b =
        assemble_transport_rhs(m, PermeabilityField::constant(m, 1.0), NodalField::Ones(m.node_count()), 1.0, dt);
    EXPECT_NEAR(b.sum() * dt, 1.0, 1e-12);
}

TEST(TransportRhs, BilinearShiftedIntegralOracle) {
    const FineMesh m = build_fine_mesh(16, 12);
    const double c = 2.5;
    const double g = 0.8;
    const double dt = 0.037;
    const double s = g * dt;
    const double a0 = 0.3, a1 = -0.7, a2 = 1.1, a3 = 0.45;
    NodalField theta(m.node_count());
    for (int n = 0; n < m.node_count(); ++n) {
        const Point x = m.coord(n);
        theta[n] = a0 + a1 * x.x1 + a2 * x.x2 + a3 * x.x1 * x.x2;
    }
    const NodalField b = assemble_transport_rhs(m, PermeabilityField::constant(m, c), theta, g, dt);

    int compared = 0;
    double worst = 0.0;
    for (int n = 0; n < m.node_count(); ++n) {
        const int i = m.node_i(n), j = m.node_j(n);
        const Point x = m.coord(n);
        if (x.x2 + m.h2() + s > 1.0) continue;  // some foot would be clamped
        const auto mx = hat_moments(x.x1, m.h1(), i > 0, i < m.nx());
        const auto my = hat_moments(x.x2, m.h2(), j > 0, j < m.ny());
        // theta(x1, x2 + s) = a0 + a1 x1 + a2 (x2 + s) + a3 x1 (x2 + s)
        const double shifted_y1 = my[1] + s * my[0];
        const double exact = c / dt *
                             (a0 * mx[0] * my[0] + a1 * mx[1] * my[0] + a2 * mx[0] * shifted_y1 +
                              a3 * mx[1] * shifted_y1);
        worst = std::max(worst, std::abs(b[n] - exact));
        ++compared;
    }
    EXPECT_GT(compared, 100);
    EXPECT_LE(worst, 1e-12);
}

TEST(TransportRhs, NoShiftIsWeightedMassAction) {
    const FineMesh m = build_fine_mesh(20, 20);
    const auto kappa = gen_channels_and_inclusions(m, 4, InclusionFieldSpec{}, 1.0, 100.0);
    NodalField theta(m.node_count());
    for (int n = 0; n < m.node_count(); ++n) theta[n] = std::sin(3.0 * m.coord(n).x1) + m.coord(n).x2;
    const double dt = 0.2;
    const NodalField b = assemble_transport_rhs(m, kappa, theta, 0.0, dt);
    const NodalField ref = assemble_weighted_mass(m, kappa) * theta / dt;
    EXPECT_LT((b - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff());
}

TEST(TransportRhs, ClampUsesTopValues) {
    // theta varying only in x2; every foot clamped to x2 = 1 sees theta(1)
    const FineMesh m = build_fine_mesh(10, 10);
    NodalField theta(m.node_count());
    for (int n = 0; n < m.node_count(); ++n) theta[n] = 1.0 + m.coord(n).x2;
    const NodalField b = assemble_transport_rhs(m, PermeabilityField::constant(m, 1.0), theta, 1.0, 2.0);
    EXPECT_NEAR(b.sum() * 2.0, 2.0, 1e-13);
}

TEST(TransportRhs, Rejects) {
    const FineMesh m = build_fine_mesh(4, 4);
    const auto k = PermeabilityField::constant(m, 1.0);
    EXPECT_THROW(assemble_transport_rhs(m, k, NodalField::Ones(3), 1.0, 0.1), InvalidArgument);
    EXPECT_THROW(assemble_transport_rhs(m, k, NodalField::Ones(m.node_count()), 1.0, 0.0), InvalidArgument);
}

TEST(Interpolate, ReproducesBilinear) {
    const FineMesh m = build_fine_mesh(7, 5);
    NodalField f(m.node_count());
    for (int n = 0; n < m.node_count(); ++n) f[n] = 2.0 - m.coord(n).x1 + 3.0 * m.coord(n).x1 * m.coord(n).x2;
    for (Point x : {Point{0.0, 0.0}, Point{1.0, 1.0}, Point{0.31, 0.77}, Point{0.5, 0.2}}) {
        EXPECT_NEAR(interpolate(m, f, x), 2.0 - x.x1 + 3.0 * x.x1 * x.x2, 1e-14);
    }
}

TEST(Assembly, Deterministic) {
    const FineMesh m = build_fine_mesh(20, 20);
    const auto kappa = gen_channels_and_inclusions(m, 9, InclusionFieldSpec{}, 1.0, 100.0);
    const SparseMatrix a = assemble_stiffness(m, kappa);
    const SparseMatrix b = assemble_stiffness(m, kappa);
    EXPECT_EQ((a - b).norm(), 0.0);
}
