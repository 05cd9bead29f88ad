#pragma once

// Monte-Carlo source discrimination by teetering statistics. A source fixes
// the distribution of the preparation offset c; each trial draws c, samples
// the joint (F1, F2) outcome from the quadrant probabilities at waiting time
// T, and the runs are compared through the disagreement fraction nu(T).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <exception>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "teeter/errors.hpp"
#include "teeter/flipflop.hpp"

namespace teeter::disc {

using flipflop::DimensionlessParams;

struct SourceModel {
    enum class Kind { constant, gaussian_jitter };

    std::string label;
    Kind kind = Kind::constant;
    double c0 = 0.0;
    double sigma = 0.0;  // standard deviation of c; 0 for constant sources
    DimensionlessParams base;

    static SourceModel constant(std::string label, double c0, DimensionlessParams base) {
        SourceModel s{std::move(label), Kind::constant, c0, 0.0, base};
        s.validate();
        return s;
    }
    static SourceModel gaussian_jitter(std::string label, double c0, double sigma, DimensionlessParams base) {
        SourceModel s{std::move(label), Kind::gaussian_jitter, c0, sigma, base};
        s.validate();
        return s;
    }

    void validate() const {
        base.validate();
        if (label.empty()) throw validation_error("SourceModel: empty label");
        if (!std::isfinite(c0)) throw validation_error("SourceModel: c0 must be finite");
        if (!(sigma >= 0) || !std::isfinite(sigma)) throw validation_error("SourceModel: sigma must be >= 0");
        if (kind == Kind::constant && sigma != 0.0) throw validation_error("SourceModel: constant source with sigma != 0");
    }
    DimensionlessParams at(double c) const { return {base.b, c, base.lambda}; }
};

inline std::string to_string(SourceModel::Kind k) {
    return k == SourceModel::Kind::constant ? "constant" : "gaussianJitter";
}

// ---- counter-based random numbers -----------------------------------------

namespace rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Key of one trial; distinct (seed, stream, index) give independent keys.
inline constexpr std::uint64_t trial_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

/// k-th uniform in [0,1) of a trial.
inline double uniform(std::uint64_t key, std::uint64_t k) {
    return static_cast<double>(splitmix64(key + 0x632be59bd9b4e019ULL * (k + 1)) >> 11) * 0x1.0p-53;
}

/// Standard normal from draws k and k+1 (Box-Muller).
inline double normal(std::uint64_t key, std::uint64_t k) {
    const double u1 = 1.0 - uniform(key, k);  // (0, 1]
    const double u2 = uniform(key, k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * flipflop::kPi * u2);
}

}  // namespace rng

// ---- trials ---------------------------------------------------------------

struct TrialRecord {
    std::string source;
    double waiting_time;
    double c;
    int f1;
    int f2;
    std::uint64_t seed;  // the trial's counter key

    bool operator==(const TrialRecord&) const = default;
};

/// Joint outcome from one uniform; quadrant index is 2*f1 + f2.
inline std::pair<int, int> sample_outcome(const flipflop::QuadrantProbabilities& q, double u) {
    const std::array<double, 4> p{q.p00, q.p01, q.p10, q.p11};
    double acc = 0.0;
    int k = 0;
    for (; k < 3; ++k) {
        acc += p[static_cast<std::size_t>(k)];
        if (u < acc) break;
    }
    return {k >> 1, k & 1};
}

/// n trials of `src` read out at waiting time T. Trial i depends only on
/// (seed, stream, i), so the output is identical for every thread count.
inline std::vector<TrialRecord> run_trials(const SourceModel& src, double T, std::size_t n, std::uint64_t seed,
                                           std::uint64_t stream = 0, int threads = 1) {
    src.validate();
    if (n == 0) throw domain_error("run_trials: need at least one trial");
    if (!std::isfinite(T)) throw domain_error("run_trials: waiting time must be finite");
    std::vector<TrialRecord> out(n);
    const bool fixed = src.kind == SourceModel::Kind::constant || src.sigma == 0.0;
    const flipflop::QuadrantProbabilities cached =
        fixed ? flipflop::quadrant_probabilities(src.at(src.c0), T) : flipflop::QuadrantProbabilities{};

    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const std::uint64_t key = rng::trial_key(seed, stream, i);
            const double c = fixed ? src.c0 : src.c0 + src.sigma * rng::normal(key, 0);
            const auto q = fixed ? cached : flipflop::quadrant_probabilities(src.at(c), T);
            const auto [f1, f2] = sample_outcome(q, rng::uniform(key, 2));
            out[i] = TrialRecord{src.label, T, c, f1, f2, key};
        }
    };
    const auto nt = static_cast<std::size_t>(std::clamp(threads, 1, 256));
    if (nt == 1 || n < 1024) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(nt);
        const std::size_t chunk = (n + nt - 1) / nt;
        for (std::size_t w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                try {
                    work(std::min(n, w * chunk), std::min(n, (w + 1) * chunk));
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return out;
}

// ---- frequency bookkeeping ------------------------------------------------

struct Bin {
    std::uint64_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    std::uint64_t total() const { return n00 + n01 + n10 + n11; }
    std::uint64_t disagreements() const { return n01 + n10; }
    std::uint64_t f1_ones() const { return n10 + n11; }
    bool operator==(const Bin&) const = default;
};

/// Relative frequency of each joint outcome, in order 00, 01, 10, 11.
inline std::array<double, 4> relative_frequencies(const Bin& b) {
    const auto n = b.total();
    if (n == 0) throw no_data_error("relative_frequencies: empty bin");
    const double dn = static_cast<double>(n);
    return {static_cast<double>(b.n00) / dn, static_cast<double>(b.n01) / dn, static_cast<double>(b.n10) / dn,
            static_cast<double>(b.n11) / dn};
}

class FrequencyTable {
public:
    using Key = std::pair<std::string, double>;

    void add(const TrialRecord& r) {
        Bin& b = bins_[{r.source, r.waiting_time}];
        const int k = 2 * r.f1 + r.f2;
        if (r.f1 < 0 || r.f1 > 1 || r.f2 < 0 || r.f2 > 1) throw validation_error("FrequencyTable: outcome bits must be 0 or 1");
        (k == 0 ? b.n00 : k == 1 ? b.n01 : k == 2 ? b.n10 : b.n11)++;
    }
    void add(const std::vector<TrialRecord>& rs) {
        for (const auto& r : rs) add(r);
    }
    void set(const std::string& source, double T, Bin b) { bins_[{source, T}] = b; }

    const Bin& bin(const std::string& source, double T) const {
        auto it = bins_.find({source, T});
        if (it == bins_.end() || it->second.total() == 0)
            throw no_data_error("no trials for source '" + source + "' at T = " + std::to_string(T));
        return it->second;
    }
    const std::map<Key, Bin>& bins() const { return bins_; }

private:
    std::map<Key, Bin> bins_;
};

/// (n01 + n10) / n for one (source, T) bin.
inline double nu(const FrequencyTable& table, const std::string& source, double T) {
    const Bin& b = table.bin(source, T);
    return static_cast<double>(b.disagreements()) / static_cast<double>(b.total());
}

/// Fraction of trials with F1 = 1, pooled over every waiting time of `source`.
inline double mean_intensity(const FrequencyTable& table, const std::string& source) {
    std::uint64_t ones = 0, total = 0;
    for (const auto& [key, b] : table.bins())
        if (key.first == source) {
            ones += b.f1_ones();
            total += b.total();
        }
    if (total == 0) throw no_data_error("mean_intensity: no trials for source '" + source + "'");
    return static_cast<double>(ones) / static_cast<double>(total);
}

// ---- expected values ------------------------------------------------------

/// E_c[Pr(F1 = 1 | c, T)]. The F1 marginal is Phi(k c) with
/// k = cosh T / sigma_x, so Gaussian jitter gives Phi(k c0 / sqrt(1 + sigma^2 k^2)).
inline double expected_f1_one(const SourceModel& src, double T) {
    const auto w = flipflop::widths(src.base, T);
    const double k = std::cosh(T) / std::sqrt((w.B1sq + w.B2sq) / 4.0);
    const double z = k * src.c0 / std::sqrt(1.0 + src.sigma * src.sigma * k * k);
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Expected intensity pooled with equal weight over the waiting times.
inline double expected_intensity(const SourceModel& src, const std::vector<double>& Ts) {
    if (Ts.empty()) throw domain_error("expected_intensity: no waiting times");
    double s = 0.0;
    for (double T : Ts) s += expected_f1_one(src, T);
    return s / static_cast<double>(Ts.size());
}

/// E_c[Pr(disagree | c, T)] by adaptive quadrature against the Gaussian weight.
inline double expected_disagreement(const SourceModel& src, double T) {
    if (src.sigma == 0.0) return flipflop::quadrant_probabilities(src.at(src.c0), T).disagreement();
    auto f = [&](double z) {
        return std::exp(-0.5 * z * z) * flipflop::quadrant_probabilities(src.at(src.c0 + src.sigma * z), T).disagreement();
    };
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -9.0, 9.0, 15, 1e-12);
    return v / std::sqrt(2.0 * flipflop::kPi);
}

// ---- calibration ----------------------------------------------------------

struct Calibration {
    SourceModel source;  // the adjusted B
    double target;       // expected intensity of A
    double achieved;     // expected intensity of the adjusted B
    std::vector<std::string> trace;
};

inline constexpr double kCalibrationTol = 0.002;
inline constexpr int kMaxBisection = 60;

/// Bisects c0 of `b` in [c0 - 5, c0 + 5] until its expected intensity over
/// `Ts` matches that of `a`. Intensity is increasing in c0.
inline Calibration calibrate(const SourceModel& a, SourceModel b, const std::vector<double>& Ts) {
    const double target = expected_intensity(a, Ts);
    std::vector<std::string> trace;
    auto intensity_at = [&](double c0) {
        SourceModel s = b;
        s.c0 = c0;
        return expected_intensity(s, Ts);
    };
    double lo = b.c0 - 5.0, hi = b.c0 + 5.0;
    const double flo = intensity_at(lo) - target, fhi = intensity_at(hi) - target;
    auto log_step = [&](int i, double c, double v) {
        std::ostringstream os;
        os.precision(12);
        os << "step " << i << ": c0 = " << c << ", intensity = " << v << ", target = " << target;
        trace.push_back(os.str());
    };
    log_step(0, lo, flo + target);
    log_step(0, hi, fhi + target);
    if (flo > kCalibrationTol || fhi < -kCalibrationTol)
        throw calibration_error("calibrate: target intensity is not bracketed by c0 +- 5", trace);
    double c = b.c0, v = intensity_at(c);
    for (int i = 1; i <= kMaxBisection; ++i) {
        c = 0.5 * (lo + hi);
        v = intensity_at(c);
        log_step(i, c, v);
        if (std::abs(v - target) <= 1e-9 * kCalibrationTol) break;
        (v < target ? lo : hi) = c;
    }
    if (!(std::abs(v - target) <= kCalibrationTol))
        throw calibration_error("calibrate: no c0 within tolerance after " + std::to_string(kMaxBisection) + " steps",
                                trace);
    b.c0 = c;
    return {b, target, v, std::move(trace)};
}

// ---- discrimination -------------------------------------------------------

struct WaitingTimeResult {
    double T;
    double nu_a, nu_b;
    double difference;  // nu_a - nu_b
    double z;           // pooled two-proportion statistic
};

struct DiscriminationReport {
    SourceModel a, b;  // b after calibration
    std::size_t trials_per_run = 0;
    std::uint64_t seed = 0;
    double expected_intensity_a = 0, expected_intensity_b = 0;
    double observed_intensity_a = 0, observed_intensity_b = 0;
    std::vector<std::string> calibration_trace;
    std::vector<WaitingTimeResult> per_time;
    double headline = 0.0;  // max_k |z_k|
    FrequencyTable table;
};

inline double two_proportion_z(std::uint64_t xa, std::uint64_t na, std::uint64_t xb, std::uint64_t nb) {
    const double pa = static_cast<double>(xa) / static_cast<double>(na);
    const double pb = static_cast<double>(xb) / static_cast<double>(nb);
    const double p = static_cast<double>(xa + xb) / static_cast<double>(na + nb);
    const double se = std::sqrt(p * (1.0 - p) * (1.0 / static_cast<double>(na) + 1.0 / static_cast<double>(nb)));
    return se > 0 ? (pa - pb) / se : 0.0;
}

struct DiscriminateOptions {
    bool calibrate = true;
    int threads = 1;
    std::vector<TrialRecord>* log = nullptr;  // receives every trial if set
};

/// Runs both sources at every waiting time. Stream 2k carries A at Ts[k] and
/// stream 2k+1 carries B, so no two runs share random numbers.
inline DiscriminationReport discriminate(const SourceModel& a, const SourceModel& b, const std::vector<double>& Ts,
                                         std::size_t n, std::uint64_t seed, const DiscriminateOptions& opts = {}) {
    if (Ts.empty()) throw domain_error("discriminate: no waiting times");
    if (a.label == b.label) throw domain_error("discriminate: sources need distinct labels");
    DiscriminationReport rep;
    rep.a = a;
    rep.b = b;
    rep.trials_per_run = n;
    rep.seed = seed;
    if (opts.calibrate) {
        auto cal = calibrate(a, b, Ts);
        rep.b = cal.source;
        rep.calibration_trace = std::move(cal.trace);
    }
    rep.expected_intensity_a = expected_intensity(rep.a, Ts);
    rep.expected_intensity_b = expected_intensity(rep.b, Ts);
    for (std::size_t k = 0; k < Ts.size(); ++k) {
        const auto ra = run_trials(rep.a, Ts[k], n, seed, 2 * k, opts.threads);
        const auto rb = run_trials(rep.b, Ts[k], n, seed, 2 * k + 1, opts.threads);
        rep.table.add(ra);
        rep.table.add(rb);
        if (opts.log) {
            opts.log->insert(opts.log->end(), ra.begin(), ra.end());
            opts.log->insert(opts.log->end(), rb.begin(), rb.end());
        }
        const Bin& ba = rep.table.bin(rep.a.label, Ts[k]);
        const Bin& bb = rep.table.bin(rep.b.label, Ts[k]);
        WaitingTimeResult r{Ts[k], nu(rep.table, rep.a.label, Ts[k]), nu(rep.table, rep.b.label, Ts[k]), 0, 0};
        r.difference = r.nu_a - r.nu_b;
        r.z = two_proportion_z(ba.disagreements(), ba.total(), bb.disagreements(), bb.total());
        rep.headline = std::max(rep.headline, std::abs(r.z));
        rep.per_time.push_back(r);
    }
    rep.observed_intensity_a = mean_intensity(rep.table, rep.a.label);
    rep.observed_intensity_b = mean_intensity(rep.table, rep.b.label);
    return rep;
}

// ---- output ---------------------------------------------------------------

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& rs) {
    os.precision(17);
    os << "source,T,c,f1,f2,seed\n";
    for (const auto& r : rs)
        os << r.source << ',' << r.waiting_time << ',' << r.c << ',' << r.f1 << ',' << r.f2 << ',' << r.seed << '\n';
}

inline nlohmann::json source_to_json(const SourceModel& s) {
    return {{"label", s.label}, {"kind", to_string(s.kind)}, {"c0", s.c0}, {"sigma", s.sigma},
            {"b", s.base.b},    {"lambda", s.base.lambda}};
}

inline nlohmann::json report_to_json(const DiscriminationReport& r) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& w : r.per_time) {
        const Bin& ba = r.table.bin(r.a.label, w.T);
        const Bin& bb = r.table.bin(r.b.label, w.T);
        per.push_back({{"T", w.T},
                       {"nuA", w.nu_a},
                       {"nuB", w.nu_b},
                       {"difference", w.difference},
                       {"z", w.z},
                       {"countsA", {ba.n00, ba.n01, ba.n10, ba.n11}},
                       {"countsB", {bb.n00, bb.n01, bb.n10, bb.n11}}});
    }
    return {{"sourceA", source_to_json(r.a)},
            {"sourceB", source_to_json(r.b)},
            {"trialsPerRun", r.trials_per_run},
            {"seed", r.seed},
            {"expectedIntensity", {{"A", r.expected_intensity_a}, {"B", r.expected_intensity_b}}},
            {"observedIntensity", {{"A", r.observed_intensity_a}, {"B", r.observed_intensity_b}}},
            {"calibrationTrace", r.calibration_trace},
            {"perWaitingTime", std::move(per)},
            {"headlineAbsZ", r.headline}};
}

}  // namespace teeter::disc
