// Acceptance checks 1 to 10. One PASS/FAIL line per criterion; exit status is
// the number of failing criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "teeter/commands.hpp"
#include "teeter/discrimination.hpp"
#include "teeter/entanglement.hpp"
#include "teeter/flipflop.hpp"
#include "teeter/pde.hpp"
#include "teeter/propositions.hpp"
#include "teeter/verify.hpp"

namespace {

using namespace teeter;
using flipflop::DimensionlessParams;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const DimensionlessParams kFit{0.556, 0.0, 1.81};

Outcome edge_case() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ub(0.05, 5.0), ul(-3.0, 5.0);
    double worst = 0;
    for (int k = 0; k < 100; ++k)
        worst = std::max(worst, std::abs(flipflop::disagreement_probability({ub(rng), 0.0, ul(rng)}, 0.0) - 0.5));
    return {worst <= 1e-12, fmt("max |P(0) - 1/2| = %.2e over 100 (b, lambda), tol 1e-12", worst)};
}

Outcome closed_form_vs_quadrature() {
    std::vector<double> lambdas;
    for (int i = 0; i < 8; ++i) lambdas.push_back(0.2 + 2.8 * i / 7.0);
    lambdas.push_back(1.0 - 1e-6);
    lambdas.push_back(1.0 + 1e-6);
    double worst = 0;
    for (double l : lambdas)
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                const DimensionlessParams p{0.3 + 1.7 * i / 9.0, 0.0, l};
                const double t = 2.5 * j / 9.0;
                worst = std::max(worst, std::abs(flipflop::disagreement_probability(p, t) - flipflop::quadrant_integral(p, t)));
            }
    return {worst <= 1e-6, fmt("max deviation %.2e on 10x10x10 (lambda incl. 1 +- 1e-6), tol 1e-6", worst)};
}

Outcome closed_form_vs_pde() {
    const pde::GridSpec ref{32.0, 1024, 5e-4};
    auto f = pde::init_gaussian(ref, kFit);
    pde::SplitStepSolver solver(ref, kFit);
    double worst = 0;
    std::string rows;
    for (double t : {0.5, 1.0, 1.5, 2.0}) {
        solver.advance_to(f, t);
        const double e = std::abs(pde::quadrant_probability(f) - flipflop::disagreement_probability(kFit, t));
        worst = std::max(worst, e);
        rows += fmt(" t=%.1f:%.1e", t, e);
    }
    // Temporal order from successive differences on the reference spatial grid.
    const auto study = pde::convergence_study(kFit, 1.0, {{32.0, 1024, 4e-3}, {32.0, 1024, 2e-3}, {32.0, 1024, 1e-3}});
    const double order = study.orders.front();
    return {worst <= 1e-3 && order >= 1.9,
            fmt("max |PDE - closed form| = %.2e (tol 1e-3;%s); temporal order %.3f (need >= 1.9)", worst, rows.c_str(), order)};
}

Outcome oscillation_and_decay() {
    // Sign changes of the forward difference of the 0.01-sampled curve.
    auto sign_changes = [](const DimensionlessParams& p, double t0, double t1, double* first) {
        int changes = 0;
        double prev = 0;
        for (double t = t0; t + 0.01 <= t1 + 1e-12; t += 0.01) {
            const double d = flipflop::disagreement_probability(p, t + 0.01) - flipflop::disagreement_probability(p, t);
            if (prev != 0 && d != 0 && (d > 0) != (prev > 0)) {
                if (changes == 0 && first) *first = t;
                ++changes;
            }
            if (d != 0) prev = d;
        }
        return changes;
    };
    double first_beyond = 0;
    const int in_window = sign_changes(kFit, 0.0, 3.0, nullptr);
    sign_changes(kFit, 0.0, 6.0, &first_beyond);
    const double p0 = flipflop::disagreement_probability(kFit, 0.0), p5 = flipflop::disagreement_probability(kFit, 5.0);
    bool monotone = true;
    const DimensionlessParams low{0.556, 0.0, 0.5};
    for (double t = 0.0; t + 0.01 <= 5.0 + 1e-12; t += 0.01)
        if (!(flipflop::disagreement_probability(low, t + 0.01) < flipflop::disagreement_probability(low, t))) monotone = false;
    return {in_window >= 1 && p5 < p0 / 50 && monotone,
            fmt("sign changes on (0,3] = %d (need >= 1; first one at t ~ %.2f); Pr(5) = %.3e vs Pr(0)/50 = %.3e; "
                "lambda=0.5 decreasing on [0,5]: %s",
                in_window, first_beyond, p5, p0 / 50, monotone ? "yes" : "no")};
}

Outcome classical_limit() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ul(0.2, 3.0), ut(0.0, 2.5);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const double l = ul(rng), t = ut(rng);
        const flipflop::FlipFlopParams p{1.0, 1.0, 1e-6, 0.556, 0.0, l};
        worst = std::max(worst, std::abs(flipflop::disagreement_probability_physical(p, t) -
                                         flipflop::classical_limit_probability(p.b, l, t)));
    }
    return {worst <= 1e-5, fmt("max |quantum - classical| = %.2e at hbar ratio 1e-6 over 20 points, tol 1e-5", worst)};
}

std::string suite_line(const verify::SuiteReport& r) {
    return fmt("%s: %zu/%zu ok, worst margin %.2e", r.proposition.c_str(), r.samples - r.failures, r.samples, r.worst_margin);
}

Outcome props_1_3() {
    const auto a = verify::run_suite("prop1", 500, 101), b = verify::run_suite("prop3", 500, 103);
    return {a.failures == 0 && b.failures == 0, suite_line(a) + "; " + suite_line(b) + " (dims 2-4, tol 1e-9)"};
}

Outcome props_2_4() {
    const auto a = verify::run_suite("prop2", 100, 102), b = verify::run_suite("prop4", 100, 104);
    return {a.failures == 0 && b.failures == 0, suite_line(a) + "; " + suite_line(b) + " (tables and overlap 1e-10)"};
}

Outcome reduction() {
    const auto r = verify::run_suite("reduction", 200, 108);
    const double eps = 0.01, delta = 0.01;
    const cvec a1 = (cvec(2) << std::sqrt(1 - delta), std::sqrt(delta)).finished();
    const cvec a2 = (cvec(2) << std::sqrt(eps), std::sqrt(1 - eps)).finished();
    const qm::SpecificQuantumModel m({{"a1", qm::DensityOperator::pure(a1)}, {"a2", qm::DensityOperator::pure(a2)}},
                                     {{"b", qm::ProjectiveResolution::computational(2)}}, qm::UnitaryEvolution::identity(2));
    const double mu2 = qm::probability(m, "a2", "b", 0.0, "0"), mu1 = qm::probability(m, "a1", "b", 0.0, "0");
    const double lhs = std::norm(a1.dot(a2));
    const bool example = std::abs(mu2 - eps) < 1e-12 && std::abs(mu1 - (1 - delta)) < 1e-12 &&
                         lhs <= std::sqrt(eps) + std::sqrt(delta) && props::prop1_bound(m, "a1", "a2", {{"b", 0.0}}).holds;
    return {r.failures == 0 && example,
            suite_line(r) + fmt(" (2x2, 2x3, tol 1e-9); |<a1|a2>|^2 = %.4f <= sqrt(eps)+sqrt(delta) = %.4f", lhs,
                                std::sqrt(eps) + std::sqrt(delta))};
}

Outcome swap_equality() {
    const auto r = verify::run_suite("entangle-swap", 200, 109);
    random::Engine rng(909);
    double smallest = 1e9;
    for (int k = 0; k < 20; ++k) {
        const Eigen::Index d = 2 + k % 2;
        const auto e = random::resolution(d, 2, rng);
        const auto a = ent::random_station(e, rng), b = ent::random_station(e, rng);
        const double theta = std::uniform_real_distribution<double>(0.0, 6.28)(rng);
        const auto s = ent::entanglement_swap_equality(a, b, verify::random_family(d, rng), verify::random_family(d, rng), theta, false);
        smallest = std::min(smallest, s.max_deviation);
    }
    return {r.failures == 0 && smallest > 1e-3,
            suite_line(r) + fmt(" (tol 1e-8); asymmetric controls: smallest deviation %.2e (need > 1e-3)", smallest)};
}

Outcome monte_carlo() {
    struct Pair {
        disc::SourceModel a, b;
    };
    const DimensionlessParams slow{1.0, 0.0, 0.5};
    const std::vector<Pair> configs{
        {disc::SourceModel::constant("steady", 0.0, kFit), disc::SourceModel::gaussian_jitter("jittery", 0.0, 0.5, kFit)},
        {disc::SourceModel::constant("left", 0.3, kFit), disc::SourceModel::constant("right", -0.2, kFit)},
        {disc::SourceModel::constant("still", 0.1, slow), disc::SourceModel::gaussian_jitter("shaky", 0.0, 0.3, slow)}};
    const std::vector<double> Ts{0.5, 1.0, 1.5};
    const std::size_t n = 1000000;
    double worst = 0;
    int seed = 0;
    for (const auto& c : configs) {
        const auto rep = disc::discriminate(c.a, c.b, Ts, n, 7000 + static_cast<std::uint64_t>(seed++), {false, 1, nullptr});
        for (const auto& w : rep.per_time)
            for (const auto* s : {&rep.a, &rep.b}) {
                const double p = disc::expected_disagreement(*s, w.T);
                const double nu = s == &rep.a ? w.nu_a : w.nu_b;
                worst = std::max(worst, std::abs(nu - p) / std::sqrt(p * (1 - p) / static_cast<double>(n)));
            }
    }

    // Two runs of one (config, seed) through the command layer, compared file by file.
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "teeter_acceptance_rerun";
    fs::remove_all(root);
    const cli::json config = {
        {"discrimination",
         {{"sources",
           {{{"label", "steady"}, {"kind", "constant"}, {"c0", 0.0}, {"b", 0.556}, {"lambda", 1.81}},
            {{"label", "jittery"}, {"kind", "gaussianJitter"}, {"c0", 0.0}, {"sigma", 0.5}, {"b", 0.556}, {"lambda", 1.81}}}},
          {"waiting_times", {0.5, 1.0, 1.5}},
          {"trials_per_run", 100000},
          {"seed", 20261014}}}};
    std::vector<manifest::Manifest> runs(2);
    bool ran = true;
    std::ostringstream chatter;  // keeps the command's summary out of the one-line report
    for (int k = 0; k < 2; ++k) {
        cli::Context ctx;
        ctx.out_dir = root / std::to_string(k);
        ctx.err = &chatter;
        ran = cli::execute("discriminate", cli::json::object(), config, ctx, &runs[static_cast<std::size_t>(k)]) == 0 && ran;
    }
    bool identical = ran && runs[0].outputs.size() == runs[1].outputs.size();
    for (std::size_t i = 0; identical && i < runs[0].outputs.size(); ++i) {
        auto slurp = [&](int k) {
            std::ifstream is(root / std::to_string(k) / runs[0].outputs[i].path, std::ios::binary);
            std::ostringstream ss;
            ss << is.rdbuf();
            return ss.str();
        };
        identical = slurp(0) == slurp(1);
    }
    fs::remove_all(root);
    return {worst <= 4.0 && identical,
            fmt("worst |nu - oracle| = %.2f sigma over 3 configs x 2 sources x 3 T at n=1e6 (need <= 4); reruns byte-identical: %s",
                worst, identical ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"edge case t=0", edge_case},
        {"closed form vs quadrature", closed_form_vs_quadrature},
        {"closed form vs PDE", closed_form_vs_pde},
        {"oscillation and decay", oscillation_and_decay},
        {"classical limit", classical_limit},
        {"bounds on random models", props_1_3},
        {"direct-sum constructions", props_2_4},
        {"state reduction", reduction},
        {"entanglement swap", swap_equality},
        {"Monte-Carlo consistency", monte_carlo}};
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2zu %-4s %s: %s [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed;
}
