#include "chaosrates/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace chaosrates {

Eigen::Index TimeGrid::index_of(double t) const {
    const auto idx = static_cast<Eigen::Index>(std::llround(t / dt));
    if (idx < 0 || idx >= times.size() || std::abs(times[idx] - t) > 1e-9 * (1.0 + std::abs(t)))
        throw std::invalid_argument("time " + std::to_string(t) + " is not on the grid");
    return idx;
}

TimeGrid make_grid(double t_max, Eigen::Index n_steps, double tail_factor) {
    if (!(t_max > 0.0)) throw std::invalid_argument("make_grid: t_max must be positive");
    if (n_steps < 1) throw std::invalid_argument("make_grid: n_steps must be >= 1");
    if (!(tail_factor >= 1.0)) throw std::invalid_argument("make_grid: tail_factor must be >= 1");

    TimeGrid grid;
    grid.dt = t_max / static_cast<double>(n_steps);
    grid.horizon_index = n_steps;
    const auto n_total = static_cast<Eigen::Index>(std::llround(tail_factor * static_cast<double>(n_steps)));
    grid.times = Eigen::ArrayXd::LinSpaced(n_total + 1, 0.0, grid.dt * static_cast<double>(n_total));
    // LinSpaced guarantees endpoints; force exact multiples of dt in between.
    for (Eigen::Index i = 0; i <= n_total; ++i) grid.times[i] = grid.dt * static_cast<double>(i);
    return grid;
}

TimeGrid with_tail_horizon(const TimeGrid& grid, double new_tail_horizon) {
    if (!(new_tail_horizon >= grid.horizon()))
        throw std::invalid_argument("with_tail_horizon: tail must not precede the horizon");
    TimeGrid out;
    out.dt = grid.dt;
    out.horizon_index = grid.horizon_index;
    const auto n_total = static_cast<Eigen::Index>(std::llround(new_tail_horizon / grid.dt));
    out.times = Eigen::ArrayXd(n_total + 1);
    for (Eigen::Index i = 0; i <= n_total; ++i) out.times[i] = grid.dt * static_cast<double>(i);
    return out;
}

} // namespace chaosrates
