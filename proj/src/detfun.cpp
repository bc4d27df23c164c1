#include "chaosrates/detfun.hpp"

#include "chaosrates/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chaosrates {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_0^L exp(-c u) du, L may be +inf.
double int_exp(double c, double L) {
    if (std::isinf(L)) {
        if (c > 0.0) return 1.0 / c;
        throw DivergentMassError("non-decaying exponential tail has infinite integral");
    }
    if (c == 0.0) return L;
    return -std::expm1(-c * L) / c;
}

// int_0^L u exp(-c u) du, L may be +inf.
double int_u_exp(double c, double L) {
    if (std::isinf(L)) {
        if (c > 0.0) return 1.0 / (c * c);
        throw DivergentMassError("non-decaying exponential tail has infinite integral");
    }
    if (c == 0.0) return 0.5 * L * L;
    const double x = c * L;
    if (std::abs(x) < 1e-3) {
        // sum_k (-x)^k / (k! (k+2)), truncated; |error| < x^4/144
        return L * L * (0.5 + x * (-1.0 / 3.0 + x * (0.125 + x * (-1.0 / 30.0))));
    }
    return (1.0 - std::exp(-x) * (1.0 + x)) / (c * c);
}

double segment_end(const std::vector<Segment>& segs, std::size_t j) {
    return j + 1 < segs.size() ? segs[j + 1].start : kInf;
}

// Amplitude of f at time s within segment j.
double amplitude_at(const Segment& seg, double s) {
    return seg.amplitude * std::exp(-seg.rate * (s - seg.start));
}

std::size_t segment_index(const std::vector<Segment>& segs, double s) {
    std::size_t j = 0;
    while (j + 1 < segs.size() && segs[j + 1].start <= s) ++j;
    return j;
}

// Breakpoints of both functions inside [t, inf), preceded by t itself.
std::vector<double> merged_breakpoints(const std::vector<Segment>& a, const std::vector<Segment>& b,
                                       double t) {
    std::vector<double> pts{t};
    for (const auto& s : a)
        if (s.start > t) pts.push_back(s.start);
    for (const auto& s : b)
        if (s.start > t) pts.push_back(s.start);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

} // namespace

std::vector<Segment> segments(const DetFn& f) {
    std::vector<Segment> out;
    if (const auto* e = std::get_if<ExpFn>(&f)) {
        out.push_back({0.0, e->amplitude, e->rate});
        return out;
    }
    const auto& p = std::get<PiecewiseConstFn>(f);
    if (p.knots.size() < 2 || p.values.size() != p.knots.size() - 1)
        throw std::invalid_argument("piecewise function needs knots.size() == values.size() + 1");
    if (p.knots[0] != 0.0) throw std::invalid_argument("piecewise knots must start at 0");
    for (Eigen::Index j = 1; j < p.knots.size(); ++j)
        if (!(p.knots[j] > p.knots[j - 1]))
            throw std::invalid_argument("piecewise knots must be strictly increasing");
    out.reserve(static_cast<std::size_t>(p.values.size()) + 1);
    for (Eigen::Index j = 0; j < p.values.size(); ++j) out.push_back({p.knots[j], p.values[j], 0.0});
    out.push_back({p.knots[p.knots.size() - 1], p.tail_amplitude, p.tail_rate});
    return out;
}

double det_value(const DetFn& f, double s) {
    const auto segs = segments(f);
    if (s < 0.0) throw std::invalid_argument("det_value: negative time");
    const auto j = segment_index(segs, s);
    return amplitude_at(segs[j], s);
}

Eigen::ArrayXd det_values(const DetFn& f, const Eigen::Ref<const Eigen::ArrayXd>& times) {
    const auto segs = segments(f);
    Eigen::ArrayXd out(times.size());
    std::size_t j = 0;
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        while (j + 1 < segs.size() && segs[j + 1].start <= times[i]) ++j;
        out[i] = amplitude_at(segs[j], times[i]);
    }
    return out;
}

double square_cum(const DetFn& f, double s) {
    if (s < 0.0) throw std::invalid_argument("square_cum: negative time");
    const auto segs = segments(f);
    double total = 0.0;
    for (std::size_t j = 0; j < segs.size() && segs[j].start < s; ++j) {
        const double end = std::min(segment_end(segs, j), s);
        const double a = segs[j].amplitude;
        total += a * a * int_exp(2.0 * segs[j].rate, end - segs[j].start);
    }
    return total;
}

double square_tail(const DetFn& f, double t) { return product_tail(f, f, t); }

double product_tail(const DetFn& f, const DetFn& g, double t) {
    if (t < 0.0) throw std::invalid_argument("product_tail: negative time");
    const auto fs = segments(f), gs = segments(g);
    const auto pts = merged_breakpoints(fs, gs, t);
    double total = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double s0 = pts[k];
        const double s1 = k + 1 < pts.size() ? pts[k + 1] : kInf;
        const auto& sf = fs[segment_index(fs, s0)];
        const auto& sg = gs[segment_index(gs, s0)];
        const double amp = amplitude_at(sf, s0) * amplitude_at(sg, s0);
        if (amp == 0.0) continue;
        total += amp * int_exp(sf.rate + sg.rate, s1 - s0);
    }
    return total;
}

double isometry_tail(const DetFn& h, const DetFn& g, double t) {
    if (t < 0.0) throw std::invalid_argument("isometry_tail: negative time");
    const auto hs = segments(h), gs = segments(g);
    const auto pts = merged_breakpoints(hs, gs, t);
    double total = 0.0;
    double inner_acc = 0.0; // int_t^{s0} g^2
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double s0 = pts[k];
        const double s1 = k + 1 < pts.size() ? pts[k + 1] : kInf;
        const double L = s1 - s0;
        const auto& sh = hs[segment_index(hs, s0)];
        const auto& sg = gs[segment_index(gs, s0)];
        const double hh = amplitude_at(sh, s0) * amplitude_at(sh, s0); // h^2 amplitude
        const double c = 2.0 * sh.rate;
        const double gg = amplitude_at(sg, s0) * amplitude_at(sg, s0); // g^2 amplitude
        const double q = 2.0 * sg.rate;
        if (hh != 0.0) {
            total += hh * inner_acc * int_exp(c, L);
            if (gg != 0.0) {
                if (q == 0.0) {
                    total += hh * gg * int_u_exp(c, L);
                } else {
                    // int_0^L e^{-cu} (1 - e^{-qu})/q du
                    total += hh * gg / q * (int_exp(c, L) - int_exp(c + q, L));
                }
            }
        }
        if (!std::isinf(L) && gg != 0.0) inner_acc += gg * int_exp(q, L);
    }
    return total;
}

bool tail_is_zero(const DetFn& f) {
    const auto segs = segments(f);
    return segs.back().amplitude == 0.0;
}

bool has_integrable_tail(const DetFn& f) {
    const auto segs = segments(f);
    return segs.back().amplitude == 0.0 || segs.back().rate > 0.0;
}

bool is_zero_fn(const DetFn& f) {
    for (const auto& s : segments(f))
        if (s.amplitude != 0.0) return false;
    return true;
}

bool nonincreasing_segments(const DetFn& f) {
    for (const auto& s : segments(f))
        if (s.amplitude != 0.0 && s.rate < 0.0) return false;
    return true;
}

} // namespace chaosrates
