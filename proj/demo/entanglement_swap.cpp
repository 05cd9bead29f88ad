// Entangled signal with plain probes versus plain signal with entangled
// probes, for interchange-symmetric stations and for a random pair.

#include <cstdio>

#include "teeter/entanglement.hpp"

int main() {
    using namespace teeter;
    random::Engine rng(7);
    const auto e = qm::ProjectiveResolution::computational(2);
    auto family = [&] {
        return ent::identical_family({random::unit_vector(2, rng), random::unit_vector(2, rng), random::unit_vector(2, rng)});
    };
    const auto fa = family(), fb = family();
    const auto sa = ent::symmetric_station(e, rng), sb = ent::symmetric_station(e, rng);
    const auto ra = ent::random_station(e, rng), rb = ent::random_station(e, rng);
    std::printf("%8s %18s %18s\n", "theta", "symmetric", "random");
    for (double theta : {0.0, 0.8, 1.6, 3.1}) {
        const auto s = ent::entanglement_swap_equality(sa, sb, fa, fb, theta);
        const auto r = ent::entanglement_swap_equality(ra, rb, fa, fb, theta, false);
        std::printf("%8.2f %18.3e %18.3e\n", theta, s.max_deviation, r.max_deviation);
    }
    const auto r = ent::entanglement_swap_equality(ra, rb, fa, fb, 0.0, false);
    std::printf("interchange defects of the random stations: %.3e, %.3e\n", r.symmetry_defect_a, r.symmetry_defect_b);
}
