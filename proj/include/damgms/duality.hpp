#pragma once

// Pointwise Yosida approximations used by the duality fixed point.
//
// For a maximal monotone G and omega * lambda < 1, the resolvent is
// J = ((1 - omega lambda) I + lambda G)^{-1} and G_lambda^omega = (I - J) / lambda.
// Solving z in (1 - omega lambda) y + lambda G(y) branch by branch gives the
// closed forms below (c = 1 - omega lambda):
//
//   Heaviside            z < 0: -omega z / c
//                   0 <= z <= lambda: z / lambda
//                        z > lambda: (1 - omega z) / c
//
//   subdifferential of the indicator of (-inf, 0]
//                        z < 0: -omega z / c
//                        z >= 0: z / lambda

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "damgms/errors.hpp"
#include "damgms/fem_assembly.hpp"

namespace damgms {

struct YosidaParams {
    double omega = 0.5;
    double lambda = 1.0;
};

namespace detail {

inline void check_params(YosidaParams p) {
    if (!(p.omega >= 0.0) || !(p.lambda > 0.0)) {
        throw InvalidArgument("Yosida parameters need omega >= 0 and lambda > 0");
    }
    if (!(p.omega * p.lambda < 1.0)) {
        throw InvalidArgument("Yosida parameters need omega * lambda < 1, got " + std::to_string(p.omega * p.lambda));
    }
}

}  // namespace detail

inline double yosida_heaviside(double z, YosidaParams p) {
    detail::check_params(p);
    const double c = 1.0 - p.omega * p.lambda;
    if (z < 0.0) return -p.omega * z / c;
    if (z <= p.lambda) return z / p.lambda;
    return (1.0 - p.omega * z) / c;
}

inline double yosida_indicator_nonpositive(double z, YosidaParams p) {
    detail::check_params(p);
    if (z < 0.0) return -p.omega * z / (1.0 - p.omega * p.lambda);
    return z / p.lambda;
}

/// Lipschitz bound shared by both maps.
inline double yosida_lipschitz(YosidaParams p) {
    return std::max(1.0 / p.lambda, p.omega / (1.0 - p.omega * p.lambda));
}

/// beta_new(i) = H_lambda^omega(p(i) + lambda beta_old(i)) at every node.
inline NodalField update_beta(const NodalField& p, const NodalField& beta_old, YosidaParams params) {
    if (p.size() != beta_old.size()) throw InvalidArgument("update_beta: length mismatch");
    detail::check_params(params);
    NodalField out(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = yosida_heaviside(p[i] + params.lambda * beta_old[i], params);
    return out;
}

/// alpha_new(k) on the seepage nodes `nodes`, alpha stored per listed node.
inline Eigen::VectorXd update_alpha(const NodalField& p, const std::vector<int>& nodes,
                                    const Eigen::VectorXd& alpha_old, YosidaParams params) {
    if (static_cast<Eigen::Index>(nodes.size()) != alpha_old.size()) {
        throw InvalidArgument("update_alpha: alpha must have one value per seepage node");
    }
    detail::check_params(params);
    Eigen::VectorXd out(alpha_old.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        out[k] = yosida_indicator_nonpositive(p[nodes[k]] + params.lambda * alpha_old[k], params);
    }
    return out;
}

struct ThetaRecovery {
    NodalField theta;       // clipped to [0, 1]
    double min_raw = 0.0;   // before clipping
    double max_raw = 0.0;
    double overshoot = 0.0; // largest distance outside [0, 1]
};

/// theta = beta + omega2 p, then clipped to [0, 1].
inline ThetaRecovery recover_theta(const NodalField& p, const NodalField& beta, double omega2) {
    if (p.size() != beta.size()) throw InvalidArgument("recover_theta: length mismatch");
    ThetaRecovery out;
    NodalField raw = beta + omega2 * p;
    out.min_raw = raw.size() ? raw.minCoeff() : 0.0;
    out.max_raw = raw.size() ? raw.maxCoeff() : 0.0;
    out.overshoot = std::max({0.0, -out.min_raw, out.max_raw - 1.0});
    out.theta = raw.cwiseMax(0.0).cwiseMin(1.0);
    return out;
}

}  // namespace damgms
