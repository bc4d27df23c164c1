#include "chaosrates/term_structure.hpp"

#include "chaosrates/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chaosrates {

void validate_curve(const DiscountCurve& curve) {
    const Eigen::Index n = curve.maturities.size();
    if (n != curve.discounts.size())
        throw InvalidCurveError("curve: maturity and discount columns differ in length");
    if (n < 2) throw InvalidCurveError("curve: need at least two maturities");
    if (curve.maturities[0] != 0.0 || curve.discounts[0] != 1.0)
        throw InvalidCurveError("curve: first row must be (0, 1)");
    for (Eigen::Index i = 1; i < n; ++i) {
        if (!(curve.maturities[i] > curve.maturities[i - 1]))
            throw InvalidCurveError("curve: maturities must be strictly increasing");
        if (!(curve.discounts[i] > 0.0))
            throw InvalidCurveError("curve: discounts must stay positive");
        if (curve.discounts[i] > curve.discounts[i - 1])
            throw InvalidCurveError("curve: discounts must be non-increasing (positive rates)");
    }
}

double bond_price(const ChaosModel& model, const BrownianPath& path, double t, double T) {
    model.grid().index_of(t);
    model.grid().index_of(T);
    if (t >= T) return 0.0; // ex-dividend convention
    if (const auto* gbm = std::get_if<GbmExponential>(&model.spec()))
        return std::exp(-gbm->rate * (T - t));
    return model.tail_mass_from(path, t, T) / model.conditional_mass(path, t);
}

double forward_rate(const ChaosModel& model, const BrownianPath& path, double t, double T) {
    if (t >= T) throw std::invalid_argument("forward_rate: need t < T");
    if (const auto* gbm = std::get_if<GbmExponential>(&model.spec())) return gbm->rate;
    return model.conditional_sigma_sq(path, t, T) / model.tail_mass_from(path, t, T);
}

ForwardShortRateGap short_rate_limit_check(const ChaosModel& model, const BrownianPath& path,
                                           double t) {
    if (!(t < model.grid().horizon()))
        throw std::invalid_argument("short_rate_limit_check: need t < horizon");
    ForwardShortRateGap out{};
    out.forward = forward_rate(model, path, t, t + model.grid().dt);
    out.short_rate = model.conditional_sigma_sq(path, t, t) / model.conditional_mass(path, t);
    return out;
}

DiscountCurve initial_curve(const ChaosModel& model,
                            const Eigen::Ref<const Eigen::ArrayXd>& maturities) {
    if (maturities.size() < 1) throw std::invalid_argument("initial_curve: empty maturity list");
    for (Eigen::Index i = 0; i < maturities.size(); ++i) {
        if (!(maturities[i] >= 0.0))
            throw std::invalid_argument("initial_curve: maturities must be non-negative");
        if (i > 0 && !(maturities[i] > maturities[i - 1]))
            throw std::invalid_argument("initial_curve: maturities must be strictly increasing");
    }
    DiscountCurve curve;
    curve.maturities = maturities;
    curve.discounts.resize(maturities.size());
    const bool custom = std::holds_alternative<CustomIntegrand>(model.spec());
    if (custom) {
        const BrownianPath origin = zero_path(model.grid());
        const double mass = model.conditional_mass(origin, 0.0);
        for (Eigen::Index i = 0; i < maturities.size(); ++i)
            curve.discounts[i] = model.tail_mass_from(origin, 0.0, maturities[i]) / mass;
    } else {
        const double mass = model.total_mass();
        for (Eigen::Index i = 0; i < maturities.size(); ++i)
            curve.discounts[i] = model.expected_pi(maturities[i]) / mass;
    }
    return curve;
}

double initial_forward(const ChaosModel& model, double T) {
    if (const auto* gbm = std::get_if<GbmExponential>(&model.spec())) return gbm->rate;
    if (std::holds_alternative<CustomIntegrand>(model.spec())) {
        const BrownianPath origin = zero_path(model.grid());
        return model.conditional_sigma_sq(origin, 0.0, T) / model.tail_mass_from(origin, 0.0, T);
    }
    return model.expected_sigma_sq(T) / model.expected_pi(T);
}

FirstChaos calibrate_first_chaos(const DiscountCurve& curve,
                                 std::vector<Eigen::Index>* flat_segments) {
    validate_curve(curve);
    const Eigen::Index n = curve.maturities.size();
    const Eigen::Index last = n - 1;

    if (curve.discounts[last] == curve.discounts[last - 1])
        throw DegenerateSpecError(
            "calibrate: flat terminal segment implies sigma vanishing beyond the last knot");

    PiecewiseConstFn sigma;
    sigma.knots = curve.maturities;
    sigma.values.resize(n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double dP = curve.discounts[j] - curve.discounts[j + 1];
        const double dT = curve.maturities[j + 1] - curve.maturities[j];
        sigma.values[j] = std::sqrt(dP / dT);
        if (dP == 0.0 && flat_segments) flat_segments->push_back(j);
    }
    // tail continues the last continuously-compounded forward: beyond T_K,
    // P(0,T) = P_K e^{-y (T - T_K)}, so sigma^2 = y P_K e^{-y (T - T_K)}
    const double y = std::log(curve.discounts[last - 1] / curve.discounts[last]) /
                     (curve.maturities[last] - curve.maturities[last - 1]);
    sigma.tail_amplitude = std::sqrt(y * curve.discounts[last]);
    sigma.tail_rate = 0.5 * y;
    return FirstChaos{DetFn{sigma}};
}

DiscountCurve read_curve_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidCurveError("curve file: empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "maturity,discount")
        throw InvalidCurveError("curve file: expected header 'maturity,discount'");
    std::vector<double> mats, discs;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw InvalidCurveError("curve file: malformed row '" + line + "'");
        try {
            mats.push_back(std::stod(a));
            discs.push_back(std::stod(b));
        } catch (const std::exception&) {
            throw InvalidCurveError("curve file: non-numeric row '" + line + "'");
        }
    }
    DiscountCurve curve;
    curve.maturities = Eigen::Map<const Eigen::ArrayXd>(mats.data(), static_cast<Eigen::Index>(mats.size()));
    curve.discounts = Eigen::Map<const Eigen::ArrayXd>(discs.data(), static_cast<Eigen::Index>(discs.size()));
    validate_curve(curve);
    return curve;
}

DiscountCurve load_curve_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidCurveError("curve file: cannot open '" + path + "'");
    return read_curve_csv(in);
}

} // namespace chaosrates
