#pragma once

#include "chaosrates/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>

namespace chaosrates {

// One realized Brownian path on the full grid [0, T_tail].
struct BrownianPath {
    std::shared_ptr<const TimeGrid> grid;
    Eigen::ArrayXd increments; // dW_i over [t_i, t_{i+1}), size n_steps
    Eigen::ArrayXd values;     // W(t_i), size n_steps + 1, values[0] = 0

    // identity of the generating stream, so nested resimulation starting from
    // this path is itself deterministic
    std::uint64_t stream_seed = 0;
    Eigen::Index path_index = 0;

    const TimeGrid& g() const { return *grid; }
};

// Lazily generated ensemble: path(i) is pure in (seed, i), so the ensemble is
// regenerable bit-for-bit and never needs to be materialized as a whole.
struct PathEnsemble {
    std::shared_ptr<const TimeGrid> grid;
    Eigen::Index n_paths = 0;
    std::uint64_t seed = 0;
    bool antithetic = false;

    BrownianPath path(Eigen::Index i) const;
};

// Antithetic ensembles pair path 2k+1 with the sign mirror of path 2k; the
// underlying normal stream for a pair is keyed off the even index.
PathEnsemble sample_paths(const TimeGrid& grid, Eigen::Index n_paths, std::uint64_t seed,
                          bool antithetic = false);

// Fresh Brownian increments for an inner (nested) simulation restarted at grid
// index `from`; keyed so nested estimators are reproducible and independent of
// evaluation order.
Eigen::ArrayXd inner_increments(const TimeGrid& grid, Eigen::Index from, std::uint64_t seed,
                                Eigen::Index outer_index, Eigen::Index inner_index);
void fill_inner_increments(const TimeGrid& grid, Eigen::Index from, std::uint64_t seed,
                           Eigen::Index outer_index, Eigen::Index inner_index,
                           Eigen::Ref<Eigen::ArrayXd> out);

// W == 0 at every grid time; handy for closed-form checks.
BrownianPath zero_path(const TimeGrid& grid);

} // namespace chaosrates
