#pragma once

// Randomized verification suites over the proposition checks, the state
// reduction theorem and the entanglement-swap equality. Each suite draws
// `samples` independent random instances; sample k of suite s is seeded from
// (seed, s, k), so results do not depend on which other suites run.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "teeter/entanglement.hpp"
#include "teeter/propositions.hpp"
#include "teeter/random_models.hpp"

namespace teeter::verify {

using nlohmann::json;

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"prop1", "prop2", "prop3", "prop4", "reduction", "entangle-swap"};
    return names;
}

inline bool is_suite(const std::string& name) {
    if (name == "all") return true;
    for (const auto& s : suite_names())
        if (s == name) return true;
    return false;
}

struct Entry {
    std::size_t sample;
    double margin;  // >= 0 iff the sample passes
    json detail;
};

struct SuiteReport {
    std::string proposition;
    std::size_t samples = 0;
    std::size_t failures = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::vector<Entry> entries;

    void add(Entry e) {
        worst_margin = std::min(worst_margin, e.margin);
        if (!(e.margin >= 0.0)) ++failures;
        entries.push_back(std::move(e));
        ++samples;
    }
};

// Tolerances of the pass/fail decision.
inline constexpr double kBoundTol = 1e-9;
inline constexpr double kTableTol = 1e-10;
inline constexpr double kReductionTol = 1e-9;
inline constexpr double kSwapTol = 1e-8;
// operator_norm of a difference of projections is <= 1 exactly; the SVD lands a few ulps above.
inline constexpr double kNormRoundoff = 1e-12;

inline const std::vector<double> kSweepTimes{0.0, 0.4, 1.3, 3.0};

inline random::Engine sample_engine(std::uint64_t seed, std::size_t suite, std::size_t sample) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(suite), static_cast<std::uint32_t>(sample)};
    return random::Engine(seq);
}

inline Eigen::Index sample_dim(std::size_t k) { return static_cast<Eigen::Index>(2 + k % 3); }

inline std::vector<props::KnobTime> sweep(const std::vector<std::string>& knobs) {
    std::vector<props::KnobTime> out;
    for (const auto& k : knobs)
        for (double t : kSweepTimes) out.push_back({k, t});
    return out;
}

inline Entry prop1_sample(random::Engine& rng, std::size_t k) {
    const auto d = sample_dim(k);
    const auto m = random::model({d, 2, 3, static_cast<std::size_t>(d)}, rng);
    const auto r = props::prop1_bound(m, "a0", "a1", sweep(m.knobs_b()));
    return {k, r.margin() + kBoundTol, {{"dim", d}, {"overlap", r.overlap_value}, {"bound", r.bound}}};
}

inline Entry prop3_sample(random::Engine& rng, std::size_t k) {
    const auto d = sample_dim(k);
    const auto m = random::model({d, 3, 2, static_cast<std::size_t>(d)}, rng);
    const auto r = props::prop3_bound(m, "b0", "b1", "w0", sweep(m.knobs_a()));
    return {k, r.margin() + kBoundTol, {{"dim", d}, {"normDiff", r.norm_diff}, {"lowerBound", r.lower_bound}}};
}

inline Entry prop2_sample(random::Engine& rng, std::size_t k) {
    const auto d = sample_dim(k);
    const auto alpha = random::model({d, 3, 2, static_cast<std::size_t>(d)}, rng);
    const auto beta = props::prop2_construct(alpha, "a0", "a1");
    const double before = qm::overlap(alpha.state("a0"), alpha.state("a1"));
    const double after = qm::overlap(beta.state("a0"), beta.state("a1"));
    const double gap = qm::table_distance(alpha, beta, kSweepTimes);
    return {k,
            std::min(kTableTol - gap, kTableTol - after),
            {{"dim", d}, {"overlap_before", before}, {"overlap_after", after}, {"table_distance", gap}}};
}

inline Entry prop4_sample(random::Engine& rng, std::size_t k) {
    const auto d = sample_dim(k);
    const auto alpha = random::model({d, 2, 3, static_cast<std::size_t>(d)}, rng);
    const auto beta = props::prop4_construct(alpha, "b0", "b1", "w0");
    const double nd = operator_norm(beta.measurement("b0").projection("w0") - beta.measurement("b1").projection("w0"));
    const double gap = qm::table_distance(alpha, beta, kSweepTimes);
    return {k,
            std::min({kTableTol - gap, nd - (1.0 - kTableTol), 1.0 + kNormRoundoff - nd}),
            {{"dim", d}, {"normDiff", nd}, {"table_distance", gap}}};
}

inline Entry reduction_sample(random::Engine& rng, std::size_t k) {
    const Eigen::Index db = k % 2 == 0 ? 2 : 3;
    const auto rho = random::density(2 * db, rng);
    const auto ea = random::resolution(2, 2, rng);
    const auto eb = random::resolution(db, 1 + k % static_cast<std::size_t>(db), rng);
    const auto r = props::reduction_theorem_check(rho, ea, eb);
    return {k, kReductionTol - r.max_deviation, {{"dims", {2, db}}, {"maxDeviation", r.max_deviation}, {"skipped", r.skipped}}};
}

inline ent::Family random_family(Eigen::Index d, random::Engine& rng) {
    std::vector<cvec> vs;
    for (int i = 0; i < 3; ++i) vs.push_back(random::unit_vector(d, rng));
    return ent::identical_family(vs);
}

inline Entry swap_sample(random::Engine& rng, std::size_t k) {
    const Eigen::Index d = k % 2 == 0 ? 2 : 3;
    const auto a = ent::symmetric_station(random::resolution(d, 2, rng), rng);
    const auto b = ent::symmetric_station(random::resolution(d, 2 + k % 2, rng), rng);
    const double theta = std::uniform_real_distribution<double>(0.0, 2 * std::numbers::pi)(rng);
    const auto r = ent::entanglement_swap_equality(a, b, random_family(d, rng), random_family(d, rng), theta);
    return {k, kSwapTol - r.max_deviation, {{"dim", d}, {"theta", theta}, {"maxDeviation", r.max_deviation}}};
}

inline SuiteReport run_suite(const std::string& name, std::size_t samples, std::uint64_t seed) {
    std::size_t index = 0;
    while (index < suite_names().size() && suite_names()[index] != name) ++index;
    if (index == suite_names().size()) throw domain_error("run_suite: unknown suite '" + name + "'");
    Entry (*fn)(random::Engine&, std::size_t) = nullptr;
    switch (index) {
        case 0: fn = prop1_sample; break;
        case 1: fn = prop2_sample; break;
        case 2: fn = prop3_sample; break;
        case 3: fn = prop4_sample; break;
        case 4: fn = reduction_sample; break;
        default: fn = swap_sample; break;
    }
    SuiteReport rep;
    rep.proposition = name;
    for (std::size_t k = 0; k < samples; ++k) {
        auto rng = sample_engine(seed, index, k);
        rep.add(fn(rng, k));
    }
    return rep;
}

inline json to_json(const SuiteReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        json j = e.detail;
        j["sample"] = e.sample;
        j["margin"] = e.margin;
        entries.push_back(std::move(j));
    }
    return {{"proposition", r.proposition},
            {"samples", r.samples},
            {"failures", r.failures},
            {"worstMargin", r.samples ? json(r.worst_margin) : json(nullptr)},
            {"entries", std::move(entries)}};
}

}  // namespace teeter::verify
