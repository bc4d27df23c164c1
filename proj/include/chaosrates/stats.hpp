#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace chaosrates {

// Welford accumulator; merge() uses the parallel (Chan) update so block-wise
// accumulation reproduces the same bits for any thread count.
struct RunningStat {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningStat& o) {
        if (o.n == 0) return;
        if (n == 0) { *this = o; return; }
        const double d = o.mean - mean;
        const auto na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double nt = na + nb;
        mean += d * nb / nt;
        m2 += o.m2 + d * d * na * nb / nt;
        n += o.n;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

// Per-coefficient Welford over equal-length array samples.
struct ArrayStat {
    std::int64_t n = 0;
    Eigen::ArrayXd mean;
    Eigen::ArrayXd m2;

    void add(const Eigen::Ref<const Eigen::ArrayXd>& x) {
        if (n == 0) {
            mean = Eigen::ArrayXd::Zero(x.size());
            m2 = Eigen::ArrayXd::Zero(x.size());
        }
        ++n;
        const Eigen::ArrayXd d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const ArrayStat& o) {
        if (o.n == 0) return;
        if (n == 0) { *this = o; return; }
        const Eigen::ArrayXd d = o.mean - mean;
        const auto na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double nt = na + nb;
        mean += d * (nb / nt);
        m2 += o.m2 + d.square() * (na * nb / nt);
        n += o.n;
    }

    Eigen::ArrayXd variance() const {
        if (n < 2) return Eigen::ArrayXd::Zero(mean.size());
        return m2 / static_cast<double>(n - 1);
    }
    Eigen::ArrayXd std_error() const {
        if (n < 2) return Eigen::ArrayXd::Zero(mean.size());
        return (variance() / static_cast<double>(n)).sqrt();
    }
};

// Fixed block size decouples the reduction tree from the thread count: blocks
// are processed by whichever worker is free but merged strictly in index
// order, so results are bit-identical for any `threads`.
inline constexpr Eigen::Index kStatBlock = 4096;

// fn(block_index, first_item, last_item_exclusive); blocks merged by caller.
template <class Fn>
void for_each_block(Eigen::Index n_items, int threads, Fn&& fn) {
    const Eigen::Index n_blocks = (n_items + kStatBlock - 1) / kStatBlock;
    if (threads <= 1 || n_blocks <= 1) {
        for (Eigen::Index b = 0; b < n_blocks; ++b)
            fn(b, b * kStatBlock, std::min(n_items, (b + 1) * kStatBlock));
        return;
    }
    std::atomic<Eigen::Index> next{0};
    auto worker = [&] {
        for (;;) {
            const Eigen::Index b = next.fetch_add(1);
            if (b >= n_blocks) return;
            fn(b, b * kStatBlock, std::min(n_items, (b + 1) * kStatBlock));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

// Accumulate one scalar statistic per path with order-independent reduction.
template <class PerPath>
RunningStat accumulate_scalar(Eigen::Index n_paths, int threads, PerPath&& per_path) {
    const Eigen::Index n_blocks = (n_paths + kStatBlock - 1) / kStatBlock;
    std::vector<RunningStat> partial(static_cast<std::size_t>(n_blocks));
    for_each_block(n_paths, threads, [&](Eigen::Index b, Eigen::Index lo, Eigen::Index hi) {
        RunningStat s;
        for (Eigen::Index i = lo; i < hi; ++i) s.add(per_path(i));
        partial[static_cast<std::size_t>(b)] = s;
    });
    RunningStat total;
    for (const auto& s : partial) total.merge(s);
    return total;
}

// Accumulate one array statistic per path (e.g. a trajectory).
template <class PerPath>
ArrayStat accumulate_array(Eigen::Index n_paths, int threads, PerPath&& per_path) {
    const Eigen::Index n_blocks = (n_paths + kStatBlock - 1) / kStatBlock;
    std::vector<ArrayStat> partial(static_cast<std::size_t>(n_blocks));
    for_each_block(n_paths, threads, [&](Eigen::Index b, Eigen::Index lo, Eigen::Index hi) {
        ArrayStat s;
        for (Eigen::Index i = lo; i < hi; ++i) s.add(per_path(i));
        partial[static_cast<std::size_t>(b)] = s;
    });
    ArrayStat total;
    for (const auto& s : partial) total.merge(s);
    return total;
}

} // namespace chaosrates
