#include "chaosrates/paths.hpp"

#include "chaosrates/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace chaosrates {

namespace {

void cumulate(const Eigen::ArrayXd& increments, Eigen::ArrayXd& values) {
    values.resize(increments.size() + 1);
    values[0] = 0.0;
    for (Eigen::Index i = 0; i < increments.size(); ++i) values[i + 1] = values[i] + increments[i];
}

} // namespace

BrownianPath PathEnsemble::path(Eigen::Index i) const {
    if (i < 0 || i >= n_paths) throw std::invalid_argument("path index out of range");
    const Eigen::Index base = antithetic ? (i - (i % 2)) : i;

    BrownianPath p;
    p.grid = grid;
    p.stream_seed = seed;
    p.path_index = i;
    const Eigen::Index n = grid->n_steps();
    p.increments.resize(n);
    CounterRng rng(derive_stream({seed, static_cast<std::uint64_t>(base)}));
    rng.fill_normals(p.increments);
    const double sqrt_dt = std::sqrt(grid->dt);
    p.increments *= sqrt_dt;
    if (antithetic && (i % 2) == 1) p.increments = -p.increments;
    cumulate(p.increments, p.values);
    return p;
}

PathEnsemble sample_paths(const TimeGrid& grid, Eigen::Index n_paths, std::uint64_t seed,
                          bool antithetic) {
    if (n_paths < 1) throw std::invalid_argument("sample_paths: n_paths must be >= 1");
    if (antithetic && (n_paths % 2) != 0)
        throw std::invalid_argument("sample_paths: antithetic sampling needs an even path count");
    PathEnsemble e;
    e.grid = std::make_shared<TimeGrid>(grid);
    e.n_paths = n_paths;
    e.seed = seed;
    e.antithetic = antithetic;
    return e;
}

void fill_inner_increments(const TimeGrid& grid, Eigen::Index from, std::uint64_t seed,
                           Eigen::Index outer_index, Eigen::Index inner_index,
                           Eigen::Ref<Eigen::ArrayXd> out) {
    if (out.size() == 0) return;
    CounterRng rng(derive_stream({seed, 0x6e65737465644dULL, // "nestedM" namespace tag
                                  static_cast<std::uint64_t>(outer_index),
                                  static_cast<std::uint64_t>(from),
                                  static_cast<std::uint64_t>(inner_index)}));
    rng.fill_normals(out);
    out *= std::sqrt(grid.dt);
}

Eigen::ArrayXd inner_increments(const TimeGrid& grid, Eigen::Index from, std::uint64_t seed,
                                Eigen::Index outer_index, Eigen::Index inner_index) {
    Eigen::ArrayXd dw(grid.n_steps() - from);
    fill_inner_increments(grid, from, seed, outer_index, inner_index, dw);
    return dw;
}

BrownianPath zero_path(const TimeGrid& grid) {
    BrownianPath p;
    p.grid = std::make_shared<TimeGrid>(grid);
    p.increments = Eigen::ArrayXd::Zero(grid.n_steps());
    p.values = Eigen::ArrayXd::Zero(grid.n_times());
    p.stream_seed = 0;
    p.path_index = -1;
    return p;
}

} // namespace chaosrates
