#include "chaosrates/instruments.hpp"

#include "chaosrates/stats.hpp"
#include "chaosrates/term_structure.hpp"

#include <cmath>
#include <stdexcept>

namespace chaosrates {

namespace {

// Constant and functional payoffs; bond calls are routed by the caller.
double payoff_value(const ChaosModel& model, const BrownianPath& path, const Payoff& payoff) {
    if (const auto* c = std::get_if<ConstantPayoff>(&payoff)) return c->amount;
    return std::get<PayoffFn>(payoff)(model, path);
}

} // namespace

PriceEstimate price_single_cashflow(const ChaosModel& model, const PathEnsemble& ensemble,
                                    double valuation_t, const CashflowSpec& cashflow,
                                    int threads) {
    if (valuation_t != 0.0 && valuation_t < cashflow.pay_time)
        throw std::invalid_argument(
            "price_single_cashflow: unconditional pricing requires valuation_t = 0");
    PriceEstimate out;
    out.n_paths = ensemble.n_paths;
    if (valuation_t >= cashflow.pay_time) return out; // ex-dividend: worth 0

    const double T = cashflow.pay_time;
    model.grid().index_of(T);
    const double pi0 = model.total_mass();
    const RunningStat stat = accumulate_scalar(ensemble.n_paths, threads, [&](Eigen::Index i) {
        const BrownianPath path = ensemble.path(i);
        double h;
        if (const auto* bc = std::get_if<BondCallPayoff>(&cashflow.payoff))
            h = std::max(bond_price(model, path, T, bc->bond_maturity) - bc->strike, 0.0);
        else
            h = payoff_value(model, path, cashflow.payoff);
        if (h < 0.0) throw std::invalid_argument("price_single_cashflow: negative payoff");
        return model.conditional_mass(path, T) * h;
    });
    out.value = stat.mean / pi0;
    out.std_error = stat.std_error() / pi0;
    return out;
}

PriceEstimate price_bond_option(const ChaosModel& model, const PathEnsemble& ensemble, double t,
                                double T, double strike, int threads) {
    if (!(0.0 < t && t < T)) throw std::invalid_argument("price_bond_option: need 0 < t < T");
    if (!(0.0 < strike && strike < 1.0))
        throw std::invalid_argument("price_bond_option: strike must lie in (0,1)");
    CashflowSpec cf;
    cf.pay_time = t;
    cf.payoff = BondCallPayoff{T, strike};
    return price_single_cashflow(model, ensemble, 0.0, cf, threads);
}

Eigen::ArrayXd bond_option_price_samples(const ChaosModel& model, const BrownianPath& path,
                                         double t, double T, double strike) {
    if (!(0.0 < t && t < T)) throw std::invalid_argument("bond option samples: need 0 < t < T");
    const TimeGrid& grid = model.grid();
    const Eigen::Index it = grid.index_of(t);
    const Eigen::Index nh = grid.horizon_index + 1;
    const double deflated_payoff =
        model.conditional_mass(path, t) *
        std::max(bond_price(model, path, t, T) - strike, 0.0);
    const Eigen::ArrayXd pi = model.pi_profile(path).head(nh);
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(nh);
    for (Eigen::Index i = 0; i < std::min(it, nh); ++i) out[i] = deflated_payoff / pi[i];
    return out;
}

Eigen::ArrayXd frn_deflated_path(const ChaosModel& model, const BrownianPath& path) {
    const Eigen::Index nh = model.grid().horizon_index + 1;
    const SigmaSample sample = model.sigma_path(path);
    return model.pi_profile(path).head(nh) + sample.cum_sq.head(nh);
}

Eigen::ArrayXd gbm_deflated_asset(const GbmAssetParams& params, const BrownianPath& path) {
    if (!(params.spot > 0.0)) throw std::invalid_argument("gbm asset: spot must be positive");
    if (params.dividend_yield < 0.0)
        throw std::invalid_argument("gbm asset: dividend yield must be >= 0");
    const TimeGrid& grid = path.g();
    const double excess = params.sigma - params.lambda;
    const double delta = params.dividend_yield;
    // pi_t S_t = spot * exp(-delta t + (sigma - lambda) W_t - (sigma - lambda)^2 t / 2)
    const Eigen::ArrayXd deflated_price =
        params.spot *
        (-delta * grid.times + excess * path.values - 0.5 * excess * excess * grid.times).exp();
    Eigen::ArrayXd out(grid.n_times());
    double dividends = 0.0;
    out[0] = deflated_price[0];
    for (Eigen::Index i = 1; i < grid.n_times(); ++i) {
        dividends += delta * deflated_price[i - 1] * grid.dt; // left-endpoint rule
        out[i] = deflated_price[i] + dividends;
    }
    return out;
}

} // namespace chaosrates
