#pragma once

#include "chaosrates/detfun.hpp"
#include "chaosrates/grid.hpp"
#include "chaosrates/paths.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <variant>

namespace chaosrates {

// sigma_s = sigma(s), deterministic.
struct FirstChaos {
    DetFn sigma;
};

// sigma_s = psi(s) + h(s) * int_0^s g(u) dW_u  (separable second-chaos kernel
// phi(u,s) = g(u) h(s)).
struct SecondChaos {
    DetFn psi;
    DetFn g;
    DetFn h;
};

// sigma_t = sqrt(r) exp(-r t/2 - lambda W_t/2 - lambda^2 t/4); the conditional
// variance is the Black-Scholes pricing kernel exp(-r t - lambda W_t - lambda^2 t/2).
struct GbmExponential {
    double rate = 0.0;
    double lambda = 0.0;
};

// sigma at grid index i as a functional of the path values w[0..i].
using SigmaFunctional =
    std::function<double(const TimeGrid&, const Eigen::ArrayXd& w, Eigen::Index i)>;

// Conditional moments estimated by nested resimulation past the conditioning
// time; nothing is added beyond T_tail, the certified eps_tail bound is
// carried through to reports instead.
struct CustomIntegrand {
    SigmaFunctional evaluator;
    Eigen::Index n_inner = 0;
    double eps_tail = 0.0;
    std::string label; // optional name for reports and serialization
};

// The GBM integrand sqrt(r) exp(-r t/2 - lambda W_t/2 - lambda^2 t/4) as a
// path functional, for driving the nested machinery against the closed form.
SigmaFunctional gbm_sigma_functional(double rate, double lambda);

// A deterministic sigma(t) as a path functional.
SigmaFunctional deterministic_sigma_functional(DetFn fn);

using ChaosSpec = std::variant<FirstChaos, SecondChaos, GbmExponential, CustomIntegrand>;

// Family-level admissibility: square-integrability of sigma and non-degeneracy
// (sigma must not vanish identically beyond any finite time). CustomIntegrand
// is accepted provisionally; its mass is estimated at model construction.
void validate_spec(const ChaosSpec& spec);

// sigma along one path, on the full grid [0, T_tail].
struct SigmaSample {
    Eigen::ArrayXd sigma;    // signed values sigma(t_i)
    Eigen::ArrayXd sigma_sq; // sigma(t_i)^2
    Eigen::ArrayXd cum_sq;   // int_0^{t_i} sigma^2 ds, left-endpoint rule
};

// Adapted unit rotation u_t = -1 on [begin, end); everything derived from
// sigma^2 is invariant under it.
struct SignFlip {
    double begin = 0.0;
    double end = 0.0;
    bool active() const { return end > begin; }
};

// A validated spec bound to a grid, with the deterministic profiles
// (tail integrals of psi, h, g and their cross terms) precomputed once so
// per-path evaluation is a vectorized pass.
class ChaosModel {
public:
    ChaosModel(ChaosSpec spec, TimeGrid grid, SignFlip flip = {});

    const ChaosSpec& spec() const { return spec_; }
    const TimeGrid& grid() const { return grid_; }
    const SignFlip& flip() const { return flip_; }

    // E[int_0^inf sigma^2 ds]; for CustomIntegrand the truncated Monte-Carlo
    // estimate plus the certified eps_tail.
    double total_mass() const { return total_mass_; }
    double eps_tail() const;

    // E[pi_t] = int_t^inf E[sigma_s^2] ds; closed-form families only.
    double expected_pi(double t) const;
    // E[sigma_t^2]; closed-form families only.
    double expected_sigma_sq(double t) const;
    // Upper bound on E[pi_{T_tail}]: analytic for closed-form families,
    // eps_tail for CustomIntegrand.
    double tail_bound() const;

    bool deterministic_kernel() const; // FirstChaos: pi is path-free

    SigmaSample sigma_path(const BrownianPath& path) const;

    // X = int_0^inf sigma dW as the discrete Ito sum over [0, T_tail].
    double x_sample(const BrownianPath& path) const;

    // pi_t = E_t[int_t^inf sigma^2 ds] at every grid time.
    Eigen::ArrayXd pi_profile(const BrownianPath& path) const;
    double conditional_mass(const BrownianPath& path, double t) const;

    // E_t[int_T^inf sigma^2 ds] for T >= t (bond-price numerator).
    double tail_mass_from(const BrownianPath& path, double t, double T) const;

    // E_t[sigma_T^2] for T >= t (forward-rate numerator).
    double conditional_sigma_sq(const BrownianPath& path, double t, double T) const;

    // theta_t, the dW coefficient of the martingale E_t[int_0^inf sigma^2 ds];
    // closed-form families only.
    Eigen::ArrayXd martingale_volatility(const BrownianPath& path) const;

private:
    double sign_at(double t) const { return flip_.active() && t >= flip_.begin && t < flip_.end ? -1.0 : 1.0; }
    Eigen::ArrayXd signs() const;
    Eigen::ArrayXd second_chaos_integral(const BrownianPath& path) const; // I_t = int_0^t g dW
    double custom_tail_mass(const BrownianPath& path, Eigen::Index from, Eigen::Index measure_from) const;

    ChaosSpec spec_;
    TimeGrid grid_;
    SignFlip flip_;
    double total_mass_ = 0.0;

    // deterministic grid profiles (family-dependent; unused ones stay empty)
    Eigen::ArrayXd sigma_det_;  // FirstChaos sigma(t_i)
    Eigen::ArrayXd m2_;         // FirstChaos int_{t_i}^inf sigma^2
    Eigen::ArrayXd psi_v_, g_v_, h_v_;
    Eigen::ArrayXd g_cum_;      // G(t_i) = int_0^{t_i} g^2
    Eigen::ArrayXd c_psi_;      // int_{t_i}^inf psi^2
    Eigen::ArrayXd c_cross_;    // int_{t_i}^inf psi h
    Eigen::ArrayXd c_h_;        // int_{t_i}^inf h^2
    Eigen::ArrayXd c_iso_;      // int_{t_i}^inf h^2(s) (G(s) - G(t_i)) ds
};

} // namespace chaosrates
