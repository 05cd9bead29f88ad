// A steady source against a jittery one calibrated to the same F1 intensity:
// the disagreement frequency still tells them apart.

#include <cstdio>

#include "teeter/discrimination.hpp"

int main() {
    using namespace teeter::disc;
    const DimensionlessParams fit{0.556, 0.0, 1.81};
    const auto steady = SourceModel::constant("steady", 0.2, fit);
    const auto jittery = SourceModel::gaussian_jitter("jittery", 0.0, 0.5, fit);
    const std::vector<double> Ts{0.5, 1.0, 1.5};
    const auto rep = discriminate(steady, jittery, Ts, 200000, 11);
    std::printf("calibrated c0 of the jittery source: %.6f\n", rep.b.c0);
    std::printf("intensity  expected %.5f / %.5f  observed %.5f / %.5f\n", rep.expected_intensity_a,
                rep.expected_intensity_b, rep.observed_intensity_a, rep.observed_intensity_b);
    std::printf("%6s %10s %10s %10s %10s %8s\n", "T", "nu_A", "oracle_A", "nu_B", "oracle_B", "z");
    for (const auto& w : rep.per_time)
        std::printf("%6.2f %10.5f %10.5f %10.5f %10.5f %8.2f\n", w.T, w.nu_a, expected_disagreement(rep.a, w.T), w.nu_b,
                    expected_disagreement(rep.b, w.T), w.z);
}
