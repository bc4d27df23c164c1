#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace chaosrates {

// splitmix64 step; full-period, invertible mixing of a 64-bit counter.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Collapses an arbitrary list of 64-bit identifiers into one stream key.
inline std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243f6a8885a308d3ULL; // pi fractional bits
    for (std::uint64_t p : parts) {
        h ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        std::uint64_t s = h;
        h = splitmix64(s);
    }
    return h;
}

// Deterministic keyed random stream. The sequence depends only on the key,
// never on how many values were drawn elsewhere, so per-path generation is
// pure in (seed, path index).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on (0,1], 53-bit resolution.
    double uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normals via Box-Muller on vectorized batches.
    void fill_normals(Eigen::Ref<Eigen::ArrayXd> out) {
        const Eigen::Index n = out.size();
        const Eigen::Index half = (n + 1) / 2;
        Eigen::ArrayXd u1(half), u2(half);
        for (Eigen::Index i = 0; i < half; ++i) u1[i] = uniform();
        for (Eigen::Index i = 0; i < half; ++i) u2[i] = uniform();
        const Eigen::ArrayXd radius = (-2.0 * u1.log()).sqrt();
        const Eigen::ArrayXd angle = 2.0 * EIGEN_PI * u2;
        out.head(half) = radius * angle.cos();
        const Eigen::Index rest = n - half;
        if (rest > 0) out.tail(rest) = (radius * angle.sin()).head(rest);
    }

private:
    std::uint64_t state_;
};

} // namespace chaosrates
