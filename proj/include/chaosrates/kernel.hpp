#pragma once

#include "chaosrates/chaos.hpp"
#include "chaosrates/paths.hpp"

#include <Eigen/Dense>

namespace chaosrates {

// Per-path trajectories of the interest-rate system on [0, horizon]:
//   pi_t   = E_t[int_t^inf sigma^2 ds]        (pricing kernel, > 0)
//   r_t    = sigma_t^2 / pi_t                 (short rate, >= 0)
//   B_t    = exp(int_0^t r ds)                (money-market account, B_0 = 1)
//   rho_t  = pi_t B_t                         (deflated account)
//   xi_t   = 1 / pi_t                         (natural numeraire)
struct KernelPath {
    Eigen::ArrayXd times;
    Eigen::ArrayXd sigma_sq;
    Eigen::ArrayXd pi;
    Eigen::ArrayXd short_rate;
    Eigen::ArrayXd bank;
    Eigen::ArrayXd rho;
    Eigen::ArrayXd numeraire;
};

// Positivity floor for the kernel; a breach is an error, never clamped.
inline constexpr double kKernelFloor = 1e-300;

KernelPath kernel_path(const ChaosModel& model, const BrownianPath& path);

// lambda_t = -theta_t / pi_t on [0, horizon]; constant lambda for the GBM
// family, identically zero for first chaos, closed form for second chaos.
Eigen::ArrayXd market_price_of_risk(const ChaosModel& model, const BrownianPath& path);

} // namespace chaosrates
