// Disagreement probability of the fitted flip-flop against its classical
// limit, with the turning points of the quantum curve.

#include <cstdio>

#include "teeter/flipflop.hpp"

int main() {
    using namespace teeter::flipflop;
    const DimensionlessParams fit{0.556, 0.0, 1.81};
    std::printf("%6s %12s %12s\n", "t", "quantum", "classical");
    for (double t = 0.0; t <= 6.0 + 1e-9; t += 0.5)
        std::printf("%6.2f %12.8f %12.8f\n", t, disagreement_probability(fit, t), classical_limit_probability(fit.b, fit.lambda, t));

    // Sign changes of the forward difference locate the oscillation.
    const double h = 1e-3;
    double prev = disagreement_probability(fit, h) - disagreement_probability(fit, 0.0);
    for (double t = h; t < 8.0; t += h) {
        const double d = disagreement_probability(fit, t + h) - disagreement_probability(fit, t);
        if ((d > 0) != (prev > 0)) std::printf("turning point near t = %.3f (P = %.3e)\n", t, disagreement_probability(fit, t));
        prev = d;
    }
}
