#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "damgms/duality.hpp"

using namespace damgms;

namespace {

constexpr YosidaParams kRef{0.5, 1.0};
constexpr double kInf = std::numeric_limits<double>::infinity();

// Set values of G at y as an interval [lo, hi]; empty when lo > hi.
struct Interval {
    double lo, hi;
};

Interval heaviside_graph(double y) {
    if (y < 0) return {0, 0};
    if (y > 0) return {1, 1};
    return {0, 1};
}

Interval indicator_graph(double y) {
    if (y < 0) return {0, 0};
    if (y > 0) return {1, 0};
    return {0, kInf};
}

// (I - J) / lambda with J = (c I + lambda G)^{-1}, J found by bisection on the
// monotone graph of c y + lambda G(y).
double resolvent_oracle(bool heaviside, double z, YosidaParams p) {
    const double c = 1.0 - p.omega * p.lambda;
    double lo = -1e3, hi = 1e3, y = 0.0;
    for (int it = 0; it < 400; ++it) {
        y = 0.5 * (lo + hi);
        const Interval g = heaviside ? heaviside_graph(y) : indicator_graph(y);
        const double f_lo = g.lo > g.hi ? kInf : c * y + p.lambda * g.lo;
        const double f_hi = g.lo > g.hi ? kInf : c * y + p.lambda * g.hi;
        if (f_lo > z) {
            hi = y;
        } else if (f_hi < z) {
            lo = y;
        } else {
            break;
        }
    }
    return (z - y) / p.lambda;
}

double yosida(bool heaviside, double z, YosidaParams p) {
    return heaviside ? yosida_heaviside(z, p) : yosida_indicator_nonpositive(z, p);
}

}  // namespace

TEST(Yosida, HeavisideExamples) {
    EXPECT_EQ(yosida_heaviside(0.0, kRef), 0.0);
    EXPECT_DOUBLE_EQ(yosida_heaviside(0.5, kRef), 0.5);
    EXPECT_DOUBLE_EQ(yosida_heaviside(2.0, kRef), 0.0);
    EXPECT_DOUBLE_EQ(yosida_heaviside(-1.0, kRef), 1.0);
}

TEST(Yosida, IndicatorExamples) {
    EXPECT_EQ(yosida_indicator_nonpositive(0.0, kRef), 0.0);
    EXPECT_DOUBLE_EQ(yosida_indicator_nonpositive(3.0, kRef), 3.0);
    EXPECT_DOUBLE_EQ(yosida_indicator_nonpositive(-2.0, kRef), 2.0);
}

TEST(Yosida, RejectsIllPosedParameters) {
    EXPECT_THROW(yosida_heaviside(0.1, {1.0, 1.0}), InvalidArgument);
    EXPECT_THROW(yosida_indicator_nonpositive(0.1, {2.0, 0.6}), InvalidArgument);
    EXPECT_THROW(yosida_heaviside(0.1, {0.5, 0.0}), InvalidArgument);
    EXPECT_THROW(yosida_heaviside(0.1, {-0.1, 1.0}), InvalidArgument);
}

class YosidaOracle : public ::testing::TestWithParam<std::tuple<bool, double, double>> {};

TEST_P(YosidaOracle, ClosedFormMatchesResolventInversion) {
    const auto [heaviside, omega, lambda] = GetParam();
    const YosidaParams p{omega, lambda};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    for (int k = 0; k < 1000; ++k) {
        const double z = k < 4 ? std::vector<double>{0.0, lambda, -1e-9, lambda + 1e-9}[k] : dist(rng);
        EXPECT_NEAR(yosida(heaviside, z, p), resolvent_oracle(heaviside, z, p), 1e-14) << "z = " << z;
    }
}

TEST_P(YosidaOracle, EquivalenceBothDirections) {
    const auto [heaviside, omega, lambda] = GetParam();
    const YosidaParams p{omega, lambda};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ys(-2.0, 2.0);
    std::uniform_real_distribution<double> us(-3.0, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int members = 0;
    for (int k = 0; k < 1000; ++k) {
        double y = ys(rng);
        if (k % 5 == 0) y = 0.0;
        if (!heaviside && k % 2 == 1) y = -std::abs(y);
        double u = us(rng);
        const Interval g = heaviside ? heaviside_graph(y) : indicator_graph(y);
        if (k % 3 != 0 && g.lo <= g.hi) {
            // draw a member of G(y) - omega y
            const double top = std::isinf(g.hi) ? g.lo + 5.0 : g.hi;
            u = g.lo + (top - g.lo) * unit(rng) - omega * y;
        }
        const bool member = g.lo <= g.hi && u + omega * y >= g.lo && u + omega * y <= g.hi;
        const double v = yosida(heaviside, y + lambda * u, p);
        const double gap = std::abs(v - u);
        if (member) {
            ++members;
            EXPECT_LE(gap, 1e-14 * std::max(1.0, std::abs(u))) << "y = " << y << " u = " << u;
        } else {
            EXPECT_GT(gap, 0.0) << "y = " << y << " u = " << u;
        }
    }
    EXPECT_GT(members, 300);
    EXPECT_LT(members, 1000);
}

TEST_P(YosidaOracle, LipschitzAndMonotoneBranches) {
    const auto [heaviside, omega, lambda] = GetParam();
    const YosidaParams p{omega, lambda};
    const double bound = yosida_lipschitz(p);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = dist(rng), b = dist(rng);
        if (a == b) continue;
        EXPECT_LE(std::abs(yosida(heaviside, a, p) - yosida(heaviside, b, p)), bound * std::abs(a - b) * (1 + 1e-12) + 1e-15);
    }
    // z < 0: nonincreasing; 0 <= z <= lambda: nondecreasing; z > lambda (Heaviside): nonincreasing
    double prev = yosida(heaviside, -5.0, p);
    for (double z = -5.0; z < 0.0; z += 0.01) {
        EXPECT_LE(yosida(heaviside, z, p), prev + 1e-15);
        prev = yosida(heaviside, z, p);
    }
    prev = yosida(heaviside, 0.0, p);
    for (double z = 0.0; z <= lambda; z += 0.01 * lambda) {
        EXPECT_GE(yosida(heaviside, z, p), prev - 1e-15);
        prev = yosida(heaviside, z, p);
    }
    if (heaviside) {
        prev = yosida(heaviside, lambda, p);
        for (double z = lambda; z < 5.0; z += 0.01) {
            EXPECT_LE(yosida(heaviside, z, p), prev + 1e-15);
            prev = yosida(heaviside, z, p);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Params, YosidaOracle,
                         ::testing::Values(std::make_tuple(true, 0.5, 1.0), std::make_tuple(false, 0.5, 1.0),
                                           std::make_tuple(true, 0.45, 1.0), std::make_tuple(false, 0.45, 1.0),
                                           std::make_tuple(true, 1.5, 0.4), std::make_tuple(false, 0.0, 2.0)));

TEST(UpdateBeta, SaturatedFixedPoint) {
    const NodalField p = NodalField::Ones(10);
    const NodalField beta = NodalField::Constant(10, 0.5);
    const NodalField out = update_beta(p, beta, kRef);
    EXPECT_LT((out - beta).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(update_beta(NodalField::Zero(4), NodalField::Zero(4), kRef), NodalField::Zero(4));
}

TEST(UpdateBeta, PointwisePermutation) {
    NodalField p(5), b(5);
    p << -1, 0.2, 3, 0.7, -0.4;
    b << 0.1, 0.9, 0.0, 0.3, 0.5;
    const NodalField out = update_beta(p, b, kRef);
    const NodalField rev = update_beta(p.reverse(), b.reverse(), kRef);
    EXPECT_EQ(out.reverse().eval(), rev);
    EXPECT_THROW(update_beta(p, NodalField::Zero(3), kRef), InvalidArgument);
}

TEST(UpdateAlpha, Examples) {
    NodalField p(6);
    p << 9, 3, 0, -2, 9, 9;
    const std::vector<int> nodes = {1, 2, 3};
    const Eigen::VectorXd out = update_alpha(p, nodes, Eigen::VectorXd::Zero(3), kRef);
    EXPECT_DOUBLE_EQ(out[0], 3.0);
    EXPECT_EQ(out[1], 0.0);
    EXPECT_DOUBLE_EQ(out[2], 2.0);
    EXPECT_THROW(update_alpha(p, nodes, Eigen::VectorXd::Zero(2), kRef), InvalidArgument);
}

TEST(RecoverTheta, Examples) {
    const auto a = recover_theta(NodalField::Zero(3), NodalField::Ones(3), 0.5);
    EXPECT_EQ(a.theta, NodalField::Ones(3));
    const auto b = recover_theta(NodalField::Ones(3), NodalField::Constant(3, 0.5), 0.5);
    EXPECT_EQ(b.theta, NodalField::Ones(3));
    EXPECT_EQ(b.overshoot, 0.0);
}

TEST(RecoverTheta, InverseIdentityAndClipping) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    NodalField p(50), beta(50);
    for (int i = 0; i < 50; ++i) {
        p[i] = d(rng);
        beta[i] = 0.5 + 0.5 * d(rng);
    }
    const auto r = recover_theta(p, beta, 0.4);
    const NodalField raw = beta + 0.4 * p;
    EXPECT_LT((raw - 0.4 * p - beta).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GE(r.theta.minCoeff(), 0.0);
    EXPECT_LE(r.theta.maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(r.min_raw, raw.minCoeff());
    EXPECT_DOUBLE_EQ(r.max_raw, raw.maxCoeff());
    EXPECT_DOUBLE_EQ(r.overshoot, std::max({0.0, -raw.minCoeff(), raw.maxCoeff() - 1.0}));
    for (int i = 0; i < 50; ++i) {
        if (raw[i] >= 0.0 && raw[i] <= 1.0) EXPECT_EQ(r.theta[i], raw[i]);
    }
}
