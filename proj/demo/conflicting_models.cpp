// Two models with identical outcome tables: one keeps a pair of preparations
// overlapping, the other makes them orthogonal. Likewise for a pair of
// measurements made maximally different.

#include <cstdio>

#include "teeter/propositions.hpp"
#include "teeter/random_models.hpp"

int main() {
    using namespace teeter;
    const auto alpha = random::model({3, 3, 2, 3}, 2024);
    const std::vector<double> times{0.0, 0.5, 1.0, 2.0};

    const auto beta = props::prop2_construct(alpha, "a0", "a1");
    std::printf("preparations a0, a1\n");
    std::printf("  overlap in alpha  %.6f\n", qm::overlap(alpha.state("a0"), alpha.state("a1")));
    std::printf("  overlap in beta   %.3e\n", qm::overlap(beta.state("a0"), beta.state("a1")));
    std::printf("  table distance    %.3e (dim %ld -> %ld)\n", qm::table_distance(alpha, beta, times),
                static_cast<long>(alpha.dim()), static_cast<long>(beta.dim()));

    const auto gamma = props::prop4_construct(alpha, "b0", "b1", "w0");
    const auto norm = [](const qm::SpecificQuantumModel& m) {
        return operator_norm(m.measurement("b0").projection("w0") - m.measurement("b1").projection("w0"));
    };
    std::printf("measurements b0, b1 at outcome w0\n");
    std::printf("  ||E0 - E1|| in alpha  %.6f\n", norm(alpha));
    std::printf("  ||E0 - E1|| in gamma  %.6f\n", norm(gamma));
    std::printf("  table distance        %.3e\n", qm::table_distance(alpha, gamma, times));
}
