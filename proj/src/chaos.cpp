#include "chaosrates/chaos.hpp"

#include "chaosrates/errors.hpp"
#include "chaosrates/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace chaosrates {

namespace {

// Internal stream for provisional mass estimates of CustomIntegrand specs.
constexpr std::uint64_t kSpecProbeSeed = 0x73706563ULL;
constexpr Eigen::Index kProbePaths = 256;

} // namespace

SigmaFunctional gbm_sigma_functional(double rate, double lambda) {
    return [rate, lambda](const TimeGrid& grid, const Eigen::ArrayXd& w, Eigen::Index i) {
        const double t = grid.times[i];
        return std::sqrt(rate) *
               std::exp(-0.5 * rate * t - 0.5 * lambda * w[i] - 0.25 * lambda * lambda * t);
    };
}

SigmaFunctional deterministic_sigma_functional(DetFn fn) {
    return [fn = std::move(fn)](const TimeGrid& grid, const Eigen::ArrayXd&, Eigen::Index i) {
        return det_value(fn, grid.times[i]);
    };
}

void validate_spec(const ChaosSpec& spec) {
    if (const auto* fc = std::get_if<FirstChaos>(&spec)) {
        if (!has_integrable_tail(fc->sigma))
            throw DivergentMassError("first chaos: sigma tail does not decay, E[int sigma^2] diverges");
        if (is_zero_fn(fc->sigma) || tail_is_zero(fc->sigma))
            throw DegenerateSpecError("first chaos: sigma vanishes beyond a finite time");
        return;
    }
    if (const auto* sc = std::get_if<SecondChaos>(&spec)) {
        if (!has_integrable_tail(sc->psi))
            throw DivergentMassError("second chaos: psi tail does not decay");
        const bool g_zero = is_zero_fn(sc->g);
        if (!g_zero) {
            if (!nonincreasing_segments(sc->g))
                throw DivergentMassError("second chaos: g must not grow exponentially");
            if (!has_integrable_tail(sc->h))
                throw DivergentMassError("second chaos: h tail does not decay while g is active");
        }
        if (tail_is_zero(sc->psi) && (tail_is_zero(sc->h) || g_zero))
            throw DegenerateSpecError("second chaos: sigma vanishes beyond a finite time");
        return;
    }
    if (const auto* gbm = std::get_if<GbmExponential>(&spec)) {
        if (gbm->rate < 0.0 || !std::isfinite(gbm->rate))
            throw DivergentMassError("gbm exponential: rate must be positive");
        if (gbm->rate == 0.0) throw DegenerateSpecError("gbm exponential: rate must be positive");
        if (!std::isfinite(gbm->lambda))
            throw std::invalid_argument("gbm exponential: lambda must be finite");
        return;
    }
    const auto& ci = std::get<CustomIntegrand>(spec);
    if (!ci.evaluator) throw std::invalid_argument("custom integrand: evaluator is required");
    if (ci.n_inner < 1) throw std::invalid_argument("custom integrand: n_inner must be >= 1");
    if (!(ci.eps_tail >= 0.0) || !std::isfinite(ci.eps_tail))
        throw std::invalid_argument("custom integrand: eps_tail must be finite and >= 0");
}

ChaosModel::ChaosModel(ChaosSpec spec, TimeGrid grid, SignFlip flip)
    : spec_(std::move(spec)), grid_(std::move(grid)), flip_(flip) {
    validate_spec(spec_);
    const Eigen::ArrayXd& t = grid_.times;
    const Eigen::Index n = t.size();

    if (const auto* fc = std::get_if<FirstChaos>(&spec_)) {
        sigma_det_ = det_values(fc->sigma, t);
        m2_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) m2_[i] = square_tail(fc->sigma, t[i]);
        total_mass_ = m2_[0];
    } else if (const auto* sc = std::get_if<SecondChaos>(&spec_)) {
        psi_v_ = det_values(sc->psi, t);
        g_v_ = det_values(sc->g, t);
        h_v_ = det_values(sc->h, t);
        g_cum_.resize(n);
        c_psi_.resize(n);
        c_cross_.resize(n);
        c_h_.resize(n);
        c_iso_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            g_cum_[i] = square_cum(sc->g, t[i]);
            c_psi_[i] = square_tail(sc->psi, t[i]);
            c_cross_[i] = product_tail(sc->psi, sc->h, t[i]);
            c_h_[i] = square_tail(sc->h, t[i]);
            c_iso_[i] = isometry_tail(sc->h, sc->g, t[i]);
        }
        total_mass_ = c_psi_[0] + c_iso_[0];
    } else if (std::holds_alternative<GbmExponential>(spec_)) {
        total_mass_ = 1.0;
    } else {
        // provisional mass of a custom integrand: truncated estimate + eps_tail
        const auto& ci = std::get<CustomIntegrand>(spec_);
        double acc = 0.0;
        for (Eigen::Index k = 0; k < kProbePaths; ++k) {
            BrownianPath probe;
            probe.grid = std::make_shared<TimeGrid>(grid_);
            probe.increments = inner_increments(grid_, 0, kSpecProbeSeed, k, 0);
            probe.values.resize(n);
            probe.values[0] = 0.0;
            for (Eigen::Index i = 0; i + 1 < n; ++i)
                probe.values[i + 1] = probe.values[i] + probe.increments[i];
            double mass = 0.0;
            for (Eigen::Index i = 0; i + 1 < n; ++i) {
                const double s = ci.evaluator(grid_, probe.values, i);
                mass += s * s * grid_.dt;
            }
            acc += mass;
        }
        total_mass_ = acc / static_cast<double>(kProbePaths) + ci.eps_tail;
        if (!std::isfinite(total_mass_))
            throw DivergentMassError("custom integrand: estimated mass is not finite");
    }
}

double ChaosModel::eps_tail() const {
    if (const auto* ci = std::get_if<CustomIntegrand>(&spec_)) return ci->eps_tail;
    return 0.0;
}

double ChaosModel::expected_pi(double t) const {
    if (const auto* fc = std::get_if<FirstChaos>(&spec_)) return square_tail(fc->sigma, t);
    if (const auto* sc = std::get_if<SecondChaos>(&spec_))
        return square_tail(sc->psi, t) + isometry_tail(sc->h, sc->g, t) +
               square_cum(sc->g, t) * square_tail(sc->h, t);
    if (const auto* gbm = std::get_if<GbmExponential>(&spec_)) return std::exp(-gbm->rate * t);
    throw UnsupportedFamilyError("expected_pi: no closed form for a custom integrand");
}

double ChaosModel::expected_sigma_sq(double t) const {
    if (const auto* fc = std::get_if<FirstChaos>(&spec_)) {
        const double v = det_value(fc->sigma, t);
        return v * v;
    }
    if (const auto* sc = std::get_if<SecondChaos>(&spec_)) {
        const double psi = det_value(sc->psi, t);
        const double h = det_value(sc->h, t);
        return psi * psi + h * h * square_cum(sc->g, t);
    }
    if (const auto* gbm = std::get_if<GbmExponential>(&spec_))
        return gbm->rate * std::exp(-gbm->rate * t);
    throw UnsupportedFamilyError("expected_sigma_sq: no closed form for a custom integrand");
}

double ChaosModel::tail_bound() const {
    if (std::holds_alternative<CustomIntegrand>(spec_)) return eps_tail();
    return expected_pi(grid_.tail_horizon());
}

bool ChaosModel::deterministic_kernel() const { return std::holds_alternative<FirstChaos>(spec_); }

Eigen::ArrayXd ChaosModel::signs() const {
    const Eigen::Index n = grid_.n_times();
    if (!flip_.active()) return Eigen::ArrayXd::Ones(n);
    Eigen::ArrayXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = sign_at(grid_.times[i]);
    return u;
}

Eigen::ArrayXd ChaosModel::second_chaos_integral(const BrownianPath& path) const {
    const Eigen::Index n = grid_.n_times();
    Eigen::ArrayXd acc(n);
    acc[0] = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) acc[i + 1] = acc[i] + g_v_[i] * path.increments[i];
    return acc;
}

SigmaSample ChaosModel::sigma_path(const BrownianPath& path) const {
    const Eigen::ArrayXd& t = grid_.times;
    const Eigen::Index n = t.size();
    SigmaSample s;

    if (std::holds_alternative<FirstChaos>(spec_)) {
        s.sigma = sigma_det_ * signs();
    } else if (std::holds_alternative<SecondChaos>(spec_)) {
        s.sigma = (psi_v_ + h_v_ * second_chaos_integral(path)) * signs();
    } else if (const auto* gbm = std::get_if<GbmExponential>(&spec_)) {
        const double r = gbm->rate, l = gbm->lambda;
        s.sigma = std::sqrt(r) *
                  (-0.5 * r * t - 0.5 * l * path.values - 0.25 * l * l * t).exp() * signs();
    } else {
        const auto& ci = std::get<CustomIntegrand>(spec_);
        s.sigma.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            s.sigma[i] = sign_at(t[i]) * ci.evaluator(grid_, path.values, i);
    }

    s.sigma_sq = s.sigma * s.sigma;
    s.cum_sq.resize(n);
    s.cum_sq[0] = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i)
        s.cum_sq[i + 1] = s.cum_sq[i] + s.sigma_sq[i] * grid_.dt;
    return s;
}

double ChaosModel::x_sample(const BrownianPath& path) const {
    const SigmaSample s = sigma_path(path);
    return (s.sigma.head(grid_.n_steps()) * path.increments).sum();
}

Eigen::ArrayXd ChaosModel::pi_profile(const BrownianPath& path) const {
    if (std::holds_alternative<FirstChaos>(spec_)) return m2_;
    if (std::holds_alternative<SecondChaos>(spec_)) {
        const Eigen::ArrayXd acc = second_chaos_integral(path);
        return c_psi_ + 2.0 * c_cross_ * acc + c_h_ * acc.square() + c_iso_;
    }
    if (const auto* gbm = std::get_if<GbmExponential>(&spec_)) {
        const double r = gbm->rate, l = gbm->lambda;
        return (-r * grid_.times - l * path.values - 0.5 * l * l * grid_.times).exp();
    }
    const Eigen::Index n = grid_.n_times();
    Eigen::ArrayXd pi(n);
    for (Eigen::Index i = 0; i < n; ++i) pi[i] = custom_tail_mass(path, i, i);
    return pi;
}

double ChaosModel::conditional_mass(const BrownianPath& path, double t) const {
    return tail_mass_from(path, t, t);
}

double ChaosModel::tail_mass_from(const BrownianPath& path, double t, double T) const {
    const Eigen::Index it = grid_.index_of(t);
    const Eigen::Index iT = grid_.index_of(T);
    if (iT < it) throw std::invalid_argument("tail_mass_from: need T >= t");

    if (std::holds_alternative<FirstChaos>(spec_)) return m2_[iT];
    if (std::holds_alternative<SecondChaos>(spec_)) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < it; ++j) acc += g_v_[j] * path.increments[j];
        return c_psi_[iT] + 2.0 * c_cross_[iT] * acc + c_h_[iT] * acc * acc + c_iso_[iT] +
               (g_cum_[iT] - g_cum_[it]) * c_h_[iT];
    }
    if (const auto* gbm = std::get_if<GbmExponential>(&spec_)) {
        const double r = gbm->rate, l = gbm->lambda;
        return std::exp(-r * T - l * path.values[it] - 0.5 * l * l * t);
    }
    return custom_tail_mass(path, it, iT);
}

double ChaosModel::conditional_sigma_sq(const BrownianPath& path, double t, double T) const {
    const Eigen::Index it = grid_.index_of(t);
    const Eigen::Index iT = grid_.index_of(T);
    if (iT < it) throw std::invalid_argument("conditional_sigma_sq: need T >= t");

    if (const auto* fc = std::get_if<FirstChaos>(&spec_)) {
        const double v = det_value(fc->sigma, T);
        return v * v;
    }
    if (std::holds_alternative<SecondChaos>(spec_)) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < it; ++j) acc += g_v_[j] * path.increments[j];
        const double mean_part = psi_v_[iT] + h_v_[iT] * acc;
        return mean_part * mean_part + h_v_[iT] * h_v_[iT] * (g_cum_[iT] - g_cum_[it]);
    }
    if (const auto* gbm = std::get_if<GbmExponential>(&spec_)) {
        const double r = gbm->rate, l = gbm->lambda;
        return r * std::exp(-r * T - l * path.values[it] - 0.5 * l * l * t);
    }

    // nested estimate of E_t[sigma_T^2]
    const auto& ci = std::get<CustomIntegrand>(spec_);
    const Eigen::Index n = grid_.n_times();
    Eigen::ArrayXd w(n), dw(n - 1 - it);
    w.head(it + 1) = path.values.head(it + 1);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < ci.n_inner; ++k) {
        fill_inner_increments(grid_, it, path.stream_seed, path.path_index, k, dw);
        for (Eigen::Index j = it; j + 1 < n; ++j) w[j + 1] = w[j] + dw[j - it];
        const double s = sign_at(T) * ci.evaluator(grid_, w, iT);
        acc += s * s;
    }
    return acc / static_cast<double>(ci.n_inner);
}

Eigen::ArrayXd ChaosModel::martingale_volatility(const BrownianPath& path) const {
    if (std::holds_alternative<FirstChaos>(spec_)) return Eigen::ArrayXd::Zero(grid_.n_times());
    if (std::holds_alternative<SecondChaos>(spec_)) {
        const Eigen::ArrayXd acc = second_chaos_integral(path);
        return 2.0 * g_v_ * (c_cross_ + c_h_ * acc);
    }
    if (const auto* gbm = std::get_if<GbmExponential>(&spec_)) {
        return -gbm->lambda * pi_profile(path);
    }
    throw UnsupportedFamilyError(
        "martingale_volatility: theta has no constructive form for a custom integrand");
}

double ChaosModel::custom_tail_mass(const BrownianPath& path, Eigen::Index from,
                                    Eigen::Index measure_from) const {
    const auto& ci = std::get<CustomIntegrand>(spec_);
    const Eigen::Index n = grid_.n_times();
    Eigen::ArrayXd w(n), dw(n - 1 - from);
    w.head(from + 1) = path.values.head(from + 1);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < ci.n_inner; ++k) {
        fill_inner_increments(grid_, from, path.stream_seed, path.path_index, k, dw);
        for (Eigen::Index j = from; j + 1 < n; ++j) w[j + 1] = w[j] + dw[j - from];
        double mass = 0.0;
        for (Eigen::Index j = measure_from; j + 1 < n; ++j) {
            const double s = ci.evaluator(grid_, w, j);
            mass += s * s * grid_.dt;
        }
        acc += mass;
    }
    return acc / static_cast<double>(ci.n_inner);
}

} // namespace chaosrates
