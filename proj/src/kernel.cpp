#include "chaosrates/kernel.hpp"

#include "chaosrates/errors.hpp"

#include <cmath>

namespace chaosrates {

KernelPath kernel_path(const ChaosModel& model, const BrownianPath& path) {
    const TimeGrid& grid = model.grid();
    const Eigen::Index nh = grid.horizon_index + 1;

    KernelPath out;
    out.times = grid.times.head(nh);
    out.sigma_sq = model.sigma_path(path).sigma_sq.head(nh);
    out.pi = model.pi_profile(path).head(nh);

    if (!(out.pi > kKernelFloor).all() || !out.pi.isFinite().all())
        throw NonpositiveKernelError(
            "pricing kernel at or below the positivity floor; tail truncation too aggressive "
            "or spec degenerate");

    out.short_rate = out.sigma_sq / out.pi;
    out.bank.resize(nh);
    double log_bank = 0.0;
    out.bank[0] = 1.0;
    for (Eigen::Index i = 1; i < nh; ++i) {
        log_bank += out.short_rate[i - 1] * grid.dt; // left-endpoint (adapted) rate
        out.bank[i] = std::exp(log_bank);
    }
    if (!out.bank.isFinite().all())
        throw NonpositiveKernelError("money-market account overflowed on the grid");

    out.rho = out.pi * out.bank;
    out.numeraire = out.pi.inverse();
    return out;
}

Eigen::ArrayXd market_price_of_risk(const ChaosModel& model, const BrownianPath& path) {
    const Eigen::Index nh = model.grid().horizon_index + 1;
    if (std::holds_alternative<GbmExponential>(model.spec())) {
        const double lambda = std::get<GbmExponential>(model.spec()).lambda;
        return Eigen::ArrayXd::Constant(nh, lambda);
    }
    const Eigen::ArrayXd theta = model.martingale_volatility(path).head(nh);
    const Eigen::ArrayXd pi = model.pi_profile(path).head(nh);
    return -theta / pi;
}

} // namespace chaosrates
