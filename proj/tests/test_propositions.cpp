#include <gtest/gtest.h>

#include "teeter/propositions.hpp"
#include "teeter/random_models.hpp"

using namespace teeter;
using namespace teeter::qm;
using namespace teeter::props;

namespace {

const double kS = 1.0 / std::sqrt(2.0);

cvec vec(std::initializer_list<cplx> xs) {
    cvec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (auto x : xs) v(i++) = x;
    return v;
}

ProjectiveResolution z_basis() { return ProjectiveResolution::computational(2); }

ProjectiveResolution x_basis() {
    return ProjectiveResolution({"0", "1"}, {projector_onto(vec({kS, kS})), projector_onto(vec({kS, -kS}))});
}

DensityOperator bell() { return DensityOperator::pure(vec({kS, 0, 0, kS})); }

std::vector<KnobTime> sweep_b(const SpecificQuantumModel& m, const std::vector<double>& times) {
    std::vector<KnobTime> out;
    for (const auto& b : m.knobs_b())
        for (double t : times) out.push_back({b, t});
    return out;
}

std::vector<KnobTime> sweep_a(const SpecificQuantumModel& m, const std::vector<double>& times) {
    std::vector<KnobTime> out;
    for (const auto& a : m.knobs_a())
        for (double t : times) out.push_back({a, t});
    return out;
}

// Brute-force sup-norm over every (a, b, t, w); the label sets must agree.
double brute_force_table_gap(const SpecificQuantumModel& m1, const SpecificQuantumModel& m2,
                             const std::vector<double>& times) {
    double worst = 0.0;
    EXPECT_EQ(m1.knobs_a(), m2.knobs_a());
    EXPECT_EQ(m1.knobs_b(), m2.knobs_b());
    for (const auto& a : m1.knobs_a())
        for (const auto& b : m1.knobs_b()) {
            EXPECT_EQ(m1.measurement(b).outcomes(), m2.measurement(b).outcomes());
            for (double t : times)
                for (const auto& w : m1.measurement(b).outcomes())
                    worst = std::max(worst, std::abs(probability(m1, a, b, t, w) - probability(m2, a, b, t, w)));
        }
    return worst;
}

const std::vector<double> kTimes{0.0, 0.7, 2.0};

}  // namespace

TEST(Prop1, OrthogonalStatesSaturate) {
    SpecificQuantumModel m({{"a1", DensityOperator::pure(vec({1, 0}))}, {"a2", DensityOperator::pure(vec({0, 1}))}},
                           {{"b", z_basis()}}, UnitaryEvolution::identity(2));
    const auto r = prop1_bound(m, "a1", "a2", {{"b", 0.0}});
    EXPECT_NEAR(r.overlap_value, 0.0, 1e-12);
    EXPECT_NEAR(r.bound, 0.0, 1e-12);
    EXPECT_TRUE(r.holds);
}

TEST(Prop1, EpsilonDeltaExample) {
    // |a2> puts weight eps on |0>, |a1> puts 1 - delta on |0>.
    const double eps = 0.01, delta = 0.01;
    const cvec a1 = vec({std::sqrt(1 - delta), std::sqrt(delta)});
    const cvec a2 = vec({std::sqrt(eps), std::sqrt(1 - eps)});
    SpecificQuantumModel m({{"a1", DensityOperator::pure(a1)}, {"a2", DensityOperator::pure(a2)}}, {{"b", z_basis()}},
                           UnitaryEvolution::identity(2));
    const auto r = prop1_bound(m, "a1", "a2", {{"b", 0.0}});
    const double pure_overlap = std::norm(a1.dot(a2));
    EXPECT_NEAR(r.overlap_value, pure_overlap, 1e-12);
    EXPECT_NEAR(r.bound, std::sqrt(eps) + std::sqrt(delta), 1e-12);
    EXPECT_LE(pure_overlap, std::sqrt(eps) + std::sqrt(delta));
    EXPECT_TRUE(r.holds);
}

TEST(Prop1, Errors) {
    const auto m = random::model({2, 2, 1, 2}, 0);
    EXPECT_THROW(prop1_bound(m, "a0", "a0", {{"b0", 0.0}}), domain_error);
    EXPECT_THROW(prop1_bound(m, "a0", "a1", {}), domain_error);
}

TEST(Prop1, HoldsOnRandomModels) {
    double worst = 1e9;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        random::Engine rng(seed);
        const auto dim = static_cast<Eigen::Index>(2 + seed % 3);
        const auto m = random::model({dim, 2, 3, static_cast<std::size_t>(dim)}, rng);
        const auto r = prop1_bound(m, "a0", "a1", sweep_b(m, {0.0, 0.4, 1.3, 3.0}));
        ASSERT_TRUE(r.holds) << "seed " << seed;
        worst = std::min(worst, r.margin());
    }
    EXPECT_GE(worst, -1e-9);
}

TEST(Prop2, IdenticalStatesBecomeOrthogonal) {
    random::Engine rng(2);
    const auto z0 = DensityOperator::pure(vec({1, 0}));
    SpecificQuantumModel alpha({{"a1", z0}, {"a2", z0}}, {{"b", x_basis()}}, UnitaryEvolution(random::hermitian(2, rng)));
    EXPECT_NEAR(overlap(alpha.state("a1"), alpha.state("a2")), 1.0, 1e-10);
    const auto beta = prop2_construct(alpha, "a1", "a2");
    EXPECT_EQ(beta.dim(), 6);
    EXPECT_LE(brute_force_table_gap(alpha, beta, kTimes), 1e-10);
    EXPECT_LE(overlap(beta.state("a1"), beta.state("a2")), 1e-10);
}

TEST(Prop2, AlreadyOrthogonalStates) {
    SpecificQuantumModel alpha({{"a1", DensityOperator::pure(vec({1, 0}))}, {"a2", DensityOperator::pure(vec({0, 1}))}},
                               {{"b", z_basis()}}, UnitaryEvolution::identity(2));
    const auto beta = prop2_construct(alpha, "a1", "a2");
    EXPECT_LE(brute_force_table_gap(alpha, beta, kTimes), 1e-10);
    EXPECT_LE(overlap(beta.state("a1"), beta.state("a2")), 1e-10);
}

TEST(Prop2, RandomModelTableEquality) {
    const auto alpha = random::model({3, 3, 2, 3}, 11);
    const auto beta = prop2_construct(alpha, "a0", "a2");
    EXPECT_EQ(beta.dim(), 9);
    EXPECT_LE(brute_force_table_gap(alpha, beta, kTimes), 1e-10);
    EXPECT_LE(overlap(beta.state("a0"), beta.state("a2")), 1e-10);
    // a1 stays in block 0, orthogonal to both moved knobs.
    EXPECT_LE(overlap(beta.state("a1"), beta.state("a0")), 1e-10);
}

TEST(Prop2, Errors) {
    const auto alpha = random::model({2, 2, 1, 2}, 1);
    EXPECT_THROW(prop2_construct(alpha, "a0", "a0"), domain_error);
    EXPECT_THROW(prop2_construct(alpha, "a0", "zz"), domain_error);
}

TEST(Prop2, SearchForDiscriminatingProjection) {
    const auto alpha = random::model({2, 2, 2, 2}, 21);
    const auto beta = prop2_construct(alpha, "a0", "a1");
    const auto f = find_discriminating_projection(alpha, beta, "a0", "a1");
    // In beta the pair has orthogonal supports, so the projection onto a0's block separates them fully.
    EXPECT_NEAR(f.gap_beta, 1.0, 1e-10);
    EXPECT_LT(f.best_gap_alpha, 1.0);
    EXPECT_TRUE(f.conflict);
    const double p1 = trace_of_product(beta.state("a0").matrix(), f.projection).real();
    const double p2 = trace_of_product(beta.state("a1").matrix(), f.projection).real();
    EXPECT_NEAR(p1 - p2, f.gap_beta, 1e-10);
}

TEST(Prop3, SameKnobGivesZero) {
    const auto m = random::model({3, 2, 2, 3}, 2);
    const auto r = prop3_bound(m, "b0", "b0", m.measurement("b0").outcomes()[0], sweep_a(m, kTimes));
    EXPECT_EQ(r.norm_diff, 0.0);
    EXPECT_EQ(r.lower_bound, 0.0);
    EXPECT_TRUE(r.holds);
}

TEST(Prop3, ZVersusXBasis) {
    SpecificQuantumModel m({{"a", DensityOperator::pure(vec({1, 0}))}}, {{"z", z_basis()}, {"x", x_basis()}},
                           UnitaryEvolution::identity(2));
    const auto r = prop3_bound(m, "z", "x", "0", {{"a", 0.0}});
    // |0><0| - |+><+| has eigenvalues +-1/sqrt2.
    EXPECT_NEAR(r.norm_diff, kS, 1e-12);
    EXPECT_GE(r.lower_bound, 0.5 - 1e-12);
    EXPECT_TRUE(r.holds);
}

TEST(Prop3, MissingOutcome) {
    const auto m = random::model({2, 1, 2, 2}, 3);
    EXPECT_THROW(prop3_bound(m, "b0", "b1", "nope", {{"a0", 0.0}}), domain_error);
}

TEST(Prop3, HoldsOnRandomModels) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        random::Engine rng(seed);
        const auto dim = static_cast<Eigen::Index>(2 + seed % 3);
        SpecificQuantumModel m({{"a0", random::density(dim, rng)}, {"a1", random::density(dim, rng, 1)}},
                               {{"b0", random::resolution(dim, 2, rng, {"c", "d"})},
                                {"b1", random::resolution(dim, 2, rng, {"c", "e"})}},
                               UnitaryEvolution(random::hermitian(dim, rng)));
        const auto r = prop3_bound(m, "b0", "b1", "c", sweep_a(m, {0.0, 0.5, 1.9}));
        ASSERT_TRUE(r.holds) << "seed " << seed;
    }
}

TEST(Prop4, EqualResolutionsBecomeMaximallyDifferent) {
    random::Engine rng(4);
    const auto e = random::resolution(2, 2, rng, {"c", "d"});
    SpecificQuantumModel alpha({{"a", random::density(2, rng)}}, {{"b1", e}, {"b2", e}},
                               UnitaryEvolution(random::hermitian(2, rng)));
    EXPECT_NEAR(operator_norm(e.projection("c") - e.projection("c")), 0.0, 1e-15);
    const auto beta = prop4_construct(alpha, "b1", "b2", "c");
    EXPECT_EQ(beta.dim(), 4);
    EXPECT_LE(brute_force_table_gap(alpha, beta, kTimes), 1e-10);
    const double nd = operator_norm(beta.measurement("b1").projection("c") - beta.measurement("b2").projection("c"));
    EXPECT_NEAR(nd, 1.0, 1e-10);
    EXPECT_LE(nd, 1.0 + 1e-12);
}

TEST(Prop4, ScalarModel) {
    cmat one = cmat::Identity(1, 1);
    ProjectiveResolution e1({"c", "d"}, {one, cmat::Zero(1, 1)});
    ProjectiveResolution e2({"c", "d"}, {one, cmat::Zero(1, 1)});
    SpecificQuantumModel alpha({{"a", DensityOperator(one)}}, {{"b1", e1}, {"b2", e2}}, UnitaryEvolution::identity(1));
    const auto beta = prop4_construct(alpha, "b1", "b2", "c");
    EXPECT_EQ(beta.dim(), 2);
    const double nd = operator_norm(beta.measurement("b1").projection("c") - beta.measurement("b2").projection("c"));
    EXPECT_NEAR(nd, 1.0, 1e-10);
    EXPECT_LE(brute_force_table_gap(alpha, beta, kTimes), 1e-10);
}

TEST(Prop4, RandomModelTableEquality) {
    random::Engine rng(5);
    SpecificQuantumModel alpha({{"a0", random::density(3, rng)}, {"a1", random::density(3, rng)}},
                               {{"b1", random::resolution(3, 3, rng, {"c", "x", "y"})},
                                {"b2", random::resolution(3, 2, rng, {"z", "c"})},
                                {"b3", random::resolution(3, 2, rng, {"q", "p"})}},
                               UnitaryEvolution(random::hermitian(3, rng)));
    const auto beta = prop4_construct(alpha, "b1", "b2", "c");
    EXPECT_LE(brute_force_table_gap(alpha, beta, kTimes), 1e-10);
    const double nd = operator_norm(beta.measurement("b1").projection("c") - beta.measurement("b2").projection("c"));
    EXPECT_GE(nd, 1.0 - 1e-10);
    EXPECT_LE(nd, 1.0 + 1e-10);
    // Sinks: b2 -> "z" (smallest label other than c), b3 -> "p".
    const cmat perp = cmat::Identity(3, 3);
    EXPECT_LE(max_abs(beta.measurement("b2").projection("z").bottomRightCorner(3, 3) - perp), 1e-14);
    EXPECT_LE(max_abs(beta.measurement("b3").projection("p").bottomRightCorner(3, 3) - perp), 1e-14);
}

TEST(Prop4, Errors) {
    const auto alpha = random::model({2, 1, 2, 2}, 6);
    EXPECT_THROW(prop4_construct(alpha, "b0", "b0", "w0"), domain_error);
    EXPECT_THROW(prop4_construct(alpha, "b0", "b1", "nope"), domain_error);
    ProjectiveResolution only_c({"c"}, {cmat::Identity(2, 2)});
    SpecificQuantumModel m({{"a", DensityOperator::maximally_mixed(2)}}, {{"b1", only_c}, {"b2", only_c}},
                           UnitaryEvolution::identity(2));
    EXPECT_THROW(prop4_construct(m, "b1", "b2", "c"), unsupported_case);
}

TEST(JointProbability, Examples) {
    const auto p00 = DensityOperator::pure(vec({1, 0, 0, 0}));
    EXPECT_NEAR(joint_probability(p00, z_basis(), z_basis(), "0", "0"), 1.0, 1e-14);
    EXPECT_NEAR(joint_probability(bell(), z_basis(), z_basis(), "0", "1"), 0.0, 1e-14);
    double total = 0.0;
    for (const auto* j : {"0", "1"})
        for (const auto* k : {"0", "1"}) {
            const double p = joint_probability(bell(), z_basis(), x_basis(), j, k);
            EXPECT_NEAR(p, 0.25, 1e-14);
            total += p;
        }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(JointProbability, DimensionMismatch) {
    EXPECT_THROW(joint_probability(DensityOperator::maximally_mixed(5), z_basis(), z_basis(), "0", "0"), structural_error);
}

TEST(ReducedDensity, ProductStateUnchanged) {
    const auto rho = DensityOperator::pure(kron(vec({1, 0}), vec({kS, kS})));
    const auto red = reduced_density(rho, z_basis().projection("0"), 2);
    EXPECT_LE(max_abs(red.matrix() - rho.matrix()), 1e-14);
}

TEST(ReducedDensity, BellCollapses) {
    const auto red = reduced_density(bell(), z_basis().projection("0"), 2);
    EXPECT_LE(max_abs(red.matrix() - projector_onto(vec({1, 0, 0, 0}))), 1e-14);
}

TEST(ReducedDensity, PureStateVectorRule) {
    random::Engine rng(31);
    const cvec psi = random::unit_vector(6, rng);
    const auto ea = random::resolution(2, 2, rng, {"0", "1"});
    const cmat e = kron(ea.projection("0"), cmat::Identity(3, 3));
    const cvec red_vec = e * psi / (e * psi).norm();
    const auto red = reduced_density(DensityOperator::pure(psi), ea.projection("0"), 3);
    const auto ev = hermitian_eigenvalues(red.matrix());
    int rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) rank += ev(i) > 1e-10;
    EXPECT_EQ(rank, 1);
    EXPECT_LE(max_abs(red.matrix() - projector_onto(red_vec)), 1e-12);
}

TEST(ReducedDensity, NullEvent) {
    const auto p00 = DensityOperator::pure(vec({1, 0, 0, 0}));
    EXPECT_THROW(reduced_density(p00, z_basis().projection("1"), 2), null_event_error);
}

TEST(ReductionTheorem, Examples) {
    const auto prod = DensityOperator::pure(kron(vec({kS, kS}), vec({1, 0})));
    EXPECT_LE(reduction_theorem_check(prod, z_basis(), z_basis()).max_deviation, 1e-12);
    EXPECT_LE(reduction_theorem_check(bell(), z_basis(), x_basis()).max_deviation, 1e-10);
    const auto p00 = DensityOperator::pure(vec({1, 0, 0, 0}));
    const auto r = reduction_theorem_check(p00, z_basis(), z_basis());
    ASSERT_EQ(r.skipped.size(), 1u);
    EXPECT_EQ(r.skipped[0], "1");
}

TEST(ReductionTheorem, RandomSweep) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        random::Engine rng(seed);
        const auto rho = random::density(6, rng);
        const auto ea = random::resolution(2, 2, rng);
        const auto eb = random::resolution(3, 1 + seed % 3, rng);
        ASSERT_LE(reduction_theorem_check(rho, ea, eb).max_deviation, 1e-9) << "seed " << seed;
    }
}
