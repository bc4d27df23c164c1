#pragma once

#include <stdexcept>
#include <string>

namespace chaosrates {

// Model-family parameters describe a sigma that vanishes after finite time
// (non-degeneracy violated) or a curve segment that implies one.
struct DegenerateSpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// E[int sigma^2] does not converge for the given parameters.
struct DivergentMassError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Discount curve violates its invariants (monotonicity, P(0,0)=1, positivity).
struct InvalidCurveError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A pricing-kernel value fell to or below the positivity floor; signals
// over-aggressive tail truncation or a degenerate spec, never clamped.
struct NonpositiveKernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation requested for a model family that does not support it.
struct UnsupportedFamilyError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace chaosrates
