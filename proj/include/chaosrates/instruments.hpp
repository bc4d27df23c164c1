#pragma once

#include "chaosrates/chaos.hpp"
#include "chaosrates/paths.hpp"

#include <Eigen/Dense>

#include <functional>
#include <variant>

namespace chaosrates {

struct PriceEstimate {
    double value = 0.0;
    double std_error = 0.0;
    Eigen::Index n_paths = 0;
};

// Built-in payoffs of a single cash flow H_T at pay_time.
struct ConstantPayoff {
    double amount = 1.0;
};
struct BondCallPayoff {
    double bond_maturity = 0.0; // T' > pay_time
    double strike = 0.0;        // K in (0,1)
};
using PayoffFn = std::function<double(const ChaosModel&, const BrownianPath&)>;
using Payoff = std::variant<ConstantPayoff, BondCallPayoff, PayoffFn>;

struct CashflowSpec {
    double pay_time = 0.0;
    Payoff payoff;
};

// S_0 = E[pi_T H_T] / pi_0 with Monte-Carlo standard error; returns 0 past the
// payment date (ex-dividend convention). Unconditional pricing only.
PriceEstimate price_single_cashflow(const ChaosModel& model, const PathEnsemble& ensemble,
                                    double valuation_t, const CashflowSpec& cashflow,
                                    int threads = 1);

// C_0 = E[pi_t (P(t,T) - K)^+] / pi_0 for a call on the T-bond expiring at t.
PriceEstimate price_bond_option(const ChaosModel& model, const PathEnsemble& ensemble, double t,
                                double T, double strike, int threads = 1);

// Per-path single-sample surface of the conditional option value: at each
// grid time s < t the deflated realized payoff pi_t (P(t,T) - K)^+ / pi_s,
// whose F_s-conditional mean is the option price C_s. Raw samples, noisy by
// construction; reporting material, never gated.
Eigen::ArrayXd bond_option_price_samples(const ChaosModel& model, const BrownianPath& path,
                                         double t, double T, double strike);

// Deflated total value of the unit floating-rate note on [0, horizon]:
// bar1_t = pi_t + int_0^t pi r ds = pi_t + int_0^t sigma^2 ds.
Eigen::ArrayXd frn_deflated_path(const ChaosModel& model, const BrownianPath& path);

// Dividend-paying geometric Brownian motion asset under the GBM pricing
// kernel with the same lambda; rate enters price and kernel with opposite
// signs and cancels from the deflated product.
struct GbmAssetParams {
    double spot = 1.0;
    double rate = 0.0;
    double lambda = 0.0;
    double sigma = 0.0;
    double dividend_yield = 0.0;
};

// bar S_t = pi_t S_t + delta int_0^t pi_u S_u du on the full path grid;
// its ensemble mean is spot at every time. The deflated value is uniformly
// integrable iff dividend_yield > (sigma - lambda)^2 / 2; that threshold is
// not statistically decidable at desk scale and is documented, not tested.
Eigen::ArrayXd gbm_deflated_asset(const GbmAssetParams& params, const BrownianPath& path);

} // namespace chaosrates
