#pragma once

#include <Eigen/Dense>

#include <variant>
#include <vector>

namespace chaosrates {

// a * exp(-b s) on [0, inf).
struct ExpFn {
    double amplitude = 0.0;
    double rate = 0.0;
};

// Constant values[j] on [knots[j], knots[j+1]) and
// tail_amplitude * exp(-tail_rate (s - knots.back())) beyond the last knot.
struct PiecewiseConstFn {
    Eigen::ArrayXd knots;  // knots[0] = 0, strictly increasing
    Eigen::ArrayXd values; // size knots.size() - 1
    double tail_amplitude = 0.0;
    double tail_rate = 0.0;
};

using DetFn = std::variant<ExpFn, PiecewiseConstFn>;

// Both forms are piecewise exponentials, which makes every integral below
// closed-form; pieces are exact, only the caller's model is approximate.
struct Segment {
    double start;     // segment covers [start, next start) or [start, inf)
    double amplitude; // f(s) = amplitude * exp(-rate (s - start))
    double rate;
};

std::vector<Segment> segments(const DetFn& f);

double det_value(const DetFn& f, double s);
Eigen::ArrayXd det_values(const DetFn& f, const Eigen::Ref<const Eigen::ArrayXd>& times);

// int_0^s f(u)^2 du; finite for every finite s.
double square_cum(const DetFn& f, double s);

// int_t^inf f(u)^2 du; throws DivergentMassError if the tail does not decay.
double square_tail(const DetFn& f, double t);

// int_t^inf f(s) g(s) ds.
double product_tail(const DetFn& f, const DetFn& g, double t);

// int_t^inf h(s)^2 [ int_t^s g(u)^2 du ] ds, the Ito-isometry contribution of
// an inner integrand g filtered through an outer envelope h.
double isometry_tail(const DetFn& h, const DetFn& g, double t);

// True when the function is identically zero beyond its last knot.
bool tail_is_zero(const DetFn& f);

// True when int_t^inf f^2 is finite for all t (zero or decaying tail).
bool has_integrable_tail(const DetFn& f);

// True when the function is identically zero.
bool is_zero_fn(const DetFn& f);

// True when no segment grows exponentially.
bool nonincreasing_segments(const DetFn& f);

} // namespace chaosrates
