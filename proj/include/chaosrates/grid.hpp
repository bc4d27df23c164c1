#pragma once

#include <Eigen/Dense>

namespace chaosrates {

// Uniform time discretization of [0, T_tail]. The working horizon t_max is a
// marked interior point; grid times past it exist only to approximate the
// upper limit of integrals to infinity.
struct TimeGrid {
    Eigen::ArrayXd times; // 0 = t_0 < t_1 < ... < t_n = T_tail, uniform
    double dt = 0.0;
    Eigen::Index horizon_index = 0; // index of t_max

    double horizon() const { return times[horizon_index]; }
    double tail_horizon() const { return times[times.size() - 1]; }
    Eigen::Index n_times() const { return times.size(); }
    Eigen::Index n_steps() const { return times.size() - 1; }

    // Index of a grid time; throws std::invalid_argument if t is off-grid.
    Eigen::Index index_of(double t) const;
};

// Uniform grid with spacing t_max/n_steps, extended past t_max so that the
// last time is tail_factor * t_max (rounded to a whole number of steps).
TimeGrid make_grid(double t_max, Eigen::Index n_steps, double tail_factor);

// Same spacing and horizon, tail extended to new_tail_horizon.
TimeGrid with_tail_horizon(const TimeGrid& grid, double new_tail_horizon);

} // namespace chaosrates
