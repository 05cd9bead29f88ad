#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <sstream>

#include "teeter/discrimination.hpp"

using namespace teeter;
using namespace teeter::disc;

namespace {

const DimensionlessParams kFit{0.556, 0.0, 1.81};

// Gauss-Hermite rule for weight e^{-x^2} by Golub-Welsch.
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(i / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        w[static_cast<std::size_t>(i)] = std::sqrt(flipflop::kPi) * v0 * v0;
    }
    return {x, w};
}

// E[f(c)] for c ~ N(c0, sigma^2).
template <class F>
double gaussian_average(double c0, double sigma, F f) {
    const auto [x, w] = gauss_hermite(120);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(c0 + std::numbers::sqrt2 * sigma * x[i]);
    return s / std::sqrt(flipflop::kPi);
}

double disagreement_oracle(const SourceModel& s, double T) {
    if (s.sigma == 0.0) return flipflop::quadrant_probabilities(s.at(s.c0), T).disagreement();
    return gaussian_average(s.c0, s.sigma, [&](double c) { return flipflop::quadrant_probabilities(s.at(c), T).disagreement(); });
}

double fraction_disagree(const std::vector<TrialRecord>& rs) {
    std::size_t k = 0;
    for (const auto& r : rs) k += r.f1 != r.f2;
    return static_cast<double>(k) / static_cast<double>(rs.size());
}

double binomial_sd(double p, std::size_t n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

}  // namespace

TEST(Rng, UniformAndNormalMoments) {
    double s = 0, ss = 0, g = 0, gg = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto key = rng::trial_key(1, 0, static_cast<std::uint64_t>(i));
        const double u = rng::uniform(key, 0);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        ss += u * u;
        const double z = rng::normal(key, 1);
        g += z;
        gg += z * z;
    }
    EXPECT_NEAR(s / n, 0.5, 0.005);
    EXPECT_NEAR(ss / n - 0.25, 1.0 / 12.0, 0.002);
    EXPECT_NEAR(g / n, 0.0, 0.01);
    EXPECT_NEAR(gg / n, 1.0, 0.015);
    EXPECT_NE(rng::trial_key(1, 0, 5), rng::trial_key(1, 1, 5));
    EXPECT_NE(rng::trial_key(1, 0, 5), rng::trial_key(2, 0, 5));
}

TEST(SourceModel, Validation) {
    EXPECT_THROW(SourceModel::gaussian_jitter("B", 0.0, -0.1, kFit), validation_error);
    EXPECT_THROW(SourceModel::constant("", 0.0, kFit), validation_error);
    SourceModel s = SourceModel::constant("A", 0.0, kFit);
    s.sigma = 0.2;
    EXPECT_THROW(s.validate(), validation_error);
}

TEST(RunTrials, SymmetricSourceAtTimeZero) {
    const auto rs = run_trials(SourceModel::constant("A", 0.0, kFit), 0.0, 100000, 42);
    EXPECT_NEAR(fraction_disagree(rs), 0.5, 0.005);
}

TEST(RunTrials, FarOffEdgeAlwaysReadsOne) {
    const auto src = SourceModel::constant("A", 10.0, kFit);
    for (double T : {0.0, 1.0, 2.5}) {
        const auto rs = run_trials(src, T, 10000, 3);
        for (const auto& r : rs) {
            ASSERT_EQ(r.f1, 1);
            ASSERT_EQ(r.f2, 1);
        }
    }
}

TEST(RunTrials, MatchesClosedFormWithinThreeSigma) {
    const std::size_t n = 1000000;
    const auto rs = run_trials(SourceModel::constant("A", 0.0, kFit), 1.0, n, 5);
    const double p = flipflop::disagreement_probability(kFit, 1.0);
    EXPECT_NEAR(fraction_disagree(rs), p, 3 * binomial_sd(p, n));
}

TEST(RunTrials, JitterMatchesAveragedOracle) {
    const std::size_t n = 200000;
    const auto src = SourceModel::gaussian_jitter("B", 0.1, 0.4, kFit);
    const auto rs = run_trials(src, 1.0, n, 8);
    const double p = disagreement_oracle(src, 1.0);
    EXPECT_NEAR(expected_disagreement(src, 1.0), p, 1e-8);
    EXPECT_NEAR(fraction_disagree(rs), p, 4 * binomial_sd(p, n));
}

TEST(RunTrials, DeterministicAndThreadIndependent) {
    const auto src = SourceModel::gaussian_jitter("B", 0.0, 0.3, kFit);
    const auto a = run_trials(src, 0.7, 5000, 11, 3, 1);
    const auto b = run_trials(src, 0.7, 5000, 11, 3, 1);
    const auto c = run_trials(src, 0.7, 5000, 11, 3, 4);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
    const auto d = run_trials(src, 0.7, 5000, 11, 4, 1);
    EXPECT_NE(a, d);
    std::ostringstream o1, o2;
    write_trials_csv(o1, a);
    write_trials_csv(o2, c);
    EXPECT_EQ(o1.str(), o2.str());
    EXPECT_EQ(o1.str().substr(0, 22), "source,T,c,f1,f2,seed\n");
}

TEST(RunTrials, Errors) {
    EXPECT_THROW(run_trials(SourceModel::constant("A", 0.0, kFit), 1.0, 0, 1), domain_error);
}

TEST(Nu, Examples) {
    FrequencyTable t;
    t.set("a", 1.0, {0, 5, 5, 0});
    t.set("b", 1.0, {10, 0, 0, 10});
    t.set("c", 1.0, {25, 25, 25, 25});
    EXPECT_EQ(nu(t, "a", 1.0), 1.0);
    EXPECT_EQ(nu(t, "b", 1.0), 0.0);
    EXPECT_EQ(nu(t, "c", 1.0), 0.5);
    EXPECT_THROW(nu(t, "a", 2.0), no_data_error);
    t.set("e", 1.0, {});
    EXPECT_THROW(nu(t, "e", 1.0), no_data_error);
}

TEST(Nu, RelativeFrequencyClosure) {
    const auto rs = run_trials(SourceModel::gaussian_jitter("B", 0.2, 0.3, kFit), 0.8, 9999, 6);
    FrequencyTable t;
    t.add(rs);
    const Bin& b = t.bin("B", 0.8);
    EXPECT_EQ(b.total(), 9999u);
    const auto f = relative_frequencies(b);
    EXPECT_NEAR(f[0] + f[1] + f[2] + f[3], 1.0, 4 * std::numeric_limits<double>::epsilon());
    EXPECT_THROW(relative_frequencies(Bin{}), no_data_error);
}

TEST(MeanIntensity, Examples) {
    FrequencyTable t;
    t.set("a", 0.5, {0, 0, 0, 7});
    t.set("a", 1.5, {0, 0, 0, 3});
    EXPECT_EQ(mean_intensity(t, "a"), 1.0);
    EXPECT_THROW(mean_intensity(t, "zz"), no_data_error);

    const std::size_t n = 100000;
    FrequencyTable sym;
    sym.add(run_trials(SourceModel::constant("s", 0.0, kFit), 1.0, n, 12));
    EXPECT_NEAR(mean_intensity(sym, "s"), 0.5, 3 * binomial_sd(0.5, n));
}

TEST(MeanIntensity, JitterMatchesAveragedOracle) {
    const std::size_t n = 100000;
    const auto src = SourceModel::gaussian_jitter("j", 0.0, 0.3, kFit);
    FrequencyTable t;
    t.add(run_trials(src, 1.0, n, 13));
    const double oracle =
        gaussian_average(src.c0, src.sigma, [&](double c) { return flipflop::prob_f1_reads_one(src.at(c), 1.0); });
    EXPECT_NEAR(expected_f1_one(src, 1.0), oracle, 1e-10);
    EXPECT_NEAR(mean_intensity(t, "j"), oracle, 3 * binomial_sd(oracle, n));
    const auto off = SourceModel::gaussian_jitter("k", 0.3, 0.5, kFit);
    EXPECT_NEAR(expected_f1_one(off, 0.6),
                gaussian_average(off.c0, off.sigma, [&](double c) { return flipflop::prob_f1_reads_one(off.at(c), 0.6); }),
                1e-10);
}

TEST(Calibrate, MatchesIntensityOfReference) {
    const std::vector<double> Ts{0.5, 1.0};
    const auto a = SourceModel::constant("A", 0.15, kFit);
    const auto b = SourceModel::gaussian_jitter("B", 0.0, 0.5, kFit);
    const auto cal = calibrate(a, b, Ts);
    EXPECT_LE(std::abs(cal.achieved - cal.target), kCalibrationTol);
    EXPECT_NEAR(expected_intensity(cal.source, Ts), expected_intensity(a, Ts), kCalibrationTol);
    EXPECT_GT(cal.source.c0, a.c0);  // jitter pulls intensity toward 1/2, so B needs a larger offset
    EXPECT_FALSE(cal.trace.empty());
    EXPECT_LE(cal.trace.size(), static_cast<std::size_t>(kMaxBisection + 2));
}

TEST(Calibrate, UnreachableTargetCarriesTrace) {
    // A sits far beyond the edge; B with huge jitter cannot leave the neighbourhood of 1/2 within c0 +- 5.
    const auto a = SourceModel::constant("A", 10.0, kFit);
    const auto b = SourceModel::gaussian_jitter("B", 0.0, 1e6, kFit);
    try {
        calibrate(a, b, {1.0});
        FAIL();
    } catch (const calibration_error& e) {
        EXPECT_FALSE(e.trace.empty());
    }
}

TEST(Discriminate, SmokeRunIsWellFormed) {
    const auto a = SourceModel::constant("A", 0.0, kFit);
    const auto b = SourceModel::gaussian_jitter("B", 0.0, 0.5, kFit);
    std::vector<TrialRecord> log;
    const auto rep = discriminate(a, b, {0.5, 1.0}, 10, 1, {true, 1, &log});
    EXPECT_EQ(rep.per_time.size(), 2u);
    EXPECT_EQ(log.size(), 40u);
    const auto j = report_to_json(rep);
    EXPECT_EQ(j["perWaitingTime"].size(), 2u);
    EXPECT_TRUE(j.contains("headlineAbsZ"));
    EXPECT_EQ(j["sourceB"]["kind"], "gaussianJitter");
    EXPECT_THROW(discriminate(a, a, {1.0}, 10, 1), domain_error);
    EXPECT_THROW(discriminate(a, b, {}, 10, 1), domain_error);
}

TEST(Discriminate, IdenticalSourcesBehaveAsNull) {
    const auto a = SourceModel::gaussian_jitter("A", 0.0, 0.3, kFit);
    auto b = a;
    b.label = "B";
    const auto rep = discriminate(a, b, {0.5, 1.0, 1.5}, 20000, 77);
    EXPECT_EQ(rep.b.c0, 0.0);
    for (const auto& w : rep.per_time) EXPECT_LE(std::abs(w.z), 3.0) << w.T;
}

TEST(Discriminate, SteadySourceTeetersMore) {
    const std::vector<double> Ts{0.5, 1.0, 1.5};
    const auto a = SourceModel::constant("A", 0.0, kFit);
    const auto b = SourceModel::gaussian_jitter("B", 0.0, 0.5, kFit);
    // The oracle fixes the direction before it is asserted of the simulation.
    for (double T : Ts) ASSERT_GT(disagreement_oracle(a, T), disagreement_oracle(b, T)) << T;
    const auto rep = discriminate(a, b, Ts, 200000, 2024);
    EXPECT_NEAR(rep.expected_intensity_a, 0.5, 1e-15);
    EXPECT_NEAR(rep.expected_intensity_b, 0.5, kCalibrationTol);
    for (const auto& w : rep.per_time) {
        EXPECT_GT(w.nu_a, w.nu_b) << w.T;
        EXPECT_GT(w.z, 3.0) << w.T;
    }
}

TEST(TwoProportion, Degenerate) {
    EXPECT_EQ(two_proportion_z(0, 10, 0, 10), 0.0);
    EXPECT_NEAR(two_proportion_z(60, 100, 40, 100), 0.2 / std::sqrt(0.25 * 0.02), 1e-12);
}
