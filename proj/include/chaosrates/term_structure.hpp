#pragma once

#include "chaosrates/chaos.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace chaosrates {

// Initial term structure P(0,T) on a maturity grid; first entry (0, 1).
struct DiscountCurve {
    Eigen::ArrayXd maturities;
    Eigen::ArrayXd discounts;
};

// Throws InvalidCurveError unless: first row (0,1), maturities strictly
// increasing, discounts positive and non-increasing, at least two rows.
void validate_curve(const DiscountCurve& curve);

// P(t,T) = E_t[int_T^inf sigma^2] / E_t[int_t^inf sigma^2] for t < T and 0 for
// t >= T (bonds go ex-dividend at maturity).
double bond_price(const ChaosModel& model, const BrownianPath& path, double t, double T);

// f(t,T) = E_t[sigma_T^2] / E_t[int_T^inf sigma^2 ds], t < T.
double forward_rate(const ChaosModel& model, const BrownianPath& path, double t, double T);

// f(t, t+dt) next to the kernel short rate sigma_t^2 / pi_t; they agree up to
// O(dt) and exactly for the constant-rate families.
struct ForwardShortRateGap {
    double forward;
    double short_rate;
    double gap() const { return forward - short_rate; }
};
ForwardShortRateGap short_rate_limit_check(const ChaosModel& model, const BrownianPath& path,
                                           double t);

// Deterministic initial curve P(0,T) = int_T^inf E[sigma^2] / int_0^inf E[sigma^2].
DiscountCurve initial_curve(const ChaosModel& model,
                            const Eigen::Ref<const Eigen::ArrayXd>& maturities);

// Path-free forward f(0,T) = E[sigma_T^2] / int_T^inf E[sigma^2].
double initial_forward(const ChaosModel& model, double T);

// Inverts the curve into a first-chaos spec: sigma^2 piecewise-constant
// between knots (-dP/dT), exponential tail continuing the last forward rate,
// total mass normalized to P(0,0) = 1. Interior flat segments are legal
// zero-rate intervals and are reported through `flat_segments`; a flat
// terminal segment leaves no tail mass and is rejected.
FirstChaos calibrate_first_chaos(const DiscountCurve& curve,
                                 std::vector<Eigen::Index>* flat_segments = nullptr);

// Two-column text format: header "maturity,discount", ascending maturities,
// first row "0,1".
DiscountCurve read_curve_csv(std::istream& in);
DiscountCurve load_curve_file(const std::string& path);

} // namespace chaosrates
