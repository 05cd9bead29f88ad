#pragma once

// Closed-form model of a balancing flip-flop read by two fan-out detectors:
// two probe particles on inverted oscillators coupled by (lambda/4) k (x-y)^2.
// In dimensionless units (time 1/omega, length sqrt(hbar/(m omega)))
//
//   |psi(x,y,t)|^2 = exp{-(u - c sqrt2 cosh t)^2 / B1^2 - v^2 / B2^2} / (pi B1 B2),
//   u = (x+y)/sqrt2,  v = (x-y)/sqrt2,
//   B1^2 = b^2 [1 + (1/b^4 + 1) sinh^2 t],
//   B2^2 = b^2 [1 + (1/(b^4 (lambda-1)) - 1) sin^2(sqrt(lambda-1) t)].

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "teeter/errors.hpp"

namespace teeter::flipflop {

inline constexpr double kPi = std::numbers::pi;

struct FlipFlopParams {
    double omega = 1.0;
    double m = 1.0;
    double hbar = 1.0;
    double b = 0.556;
    double c = 0.0;
    double lambda = 1.81;

    void validate() const {
        if (!(omega > 0) || !(m > 0) || !(hbar > 0) || !(b > 0))
            throw validation_error("FlipFlopParams: omega, m, hbar and b must be strictly positive");
        if (!std::isfinite(c) || !std::isfinite(lambda)) throw validation_error("FlipFlopParams: c and lambda must be finite");
    }
    /// sqrt(hbar / (m omega)).
    double length_scale() const { return std::sqrt(hbar / (m * omega)); }
};

struct DimensionlessParams {
    double b = 0.556;
    double c = 0.0;
    double lambda = 1.81;

    void validate() const {
        if (!(b > 0) || !std::isfinite(b)) throw validation_error("DimensionlessParams: b must be positive");
        if (!std::isfinite(c) || !std::isfinite(lambda)) throw validation_error("DimensionlessParams: c and lambda must be finite");
    }
};

inline DimensionlessParams to_dimensionless(const FlipFlopParams& p) {
    p.validate();
    const double s = p.length_scale();
    return {p.b / s, p.c / s, p.lambda};
}

inline FlipFlopParams from_dimensionless(const DimensionlessParams& d, double omega, double m, double hbar) {
    FlipFlopParams p{omega, m, hbar, 0.0, 0.0, d.lambda};
    const double s = p.length_scale();
    p.b = d.b * s;
    p.c = d.c * s;
    p.validate();
    return p;
}

/// sin^2(sqrt(d) t) / d, continued to d <= 0 as sinh^2(sqrt(-d) t) / (-d) and t^2 at d = 0.
/// Near d = 0 the series t^2 (1 - d t^2/3 + 2 d^2 t^4/45) is used; its remainder is
/// below 1e-14 relative wherever |d| t^2 < 1e-4.
inline double detuned_sin2(double d, double t) {
    const double x2 = d * t * t;
    if (std::abs(x2) < 1e-4) return t * t * (1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 45.0);
    if (d > 0) {
        const double s = std::sin(std::sqrt(d) * t);
        return s * s / d;
    }
    const double s = std::sinh(std::sqrt(-d) * t);
    return s * s / (-d);
}

/// cos(sqrt(d) t) continued to cosh(sqrt(-d) t) for d < 0.
inline double detuned_cos(double d, double t) {
    if (d > 0) return std::cos(std::sqrt(d) * t);
    if (d < 0) return std::cosh(std::sqrt(-d) * t);
    return 1.0;
}

struct Widths {
    double B1sq;
    double B2sq;
};

inline Widths widths(const DimensionlessParams& p, double t) {
    p.validate();
    const double b2 = p.b * p.b;
    const double inv_b4 = 1.0 / (b2 * b2);
    const double sh = std::sinh(t);
    const double d = p.lambda - 1.0;
    // (1/(b^4 d) - 1) sin^2(sqrt(d) t) == (1/b^4 - d) * sin^2(sqrt(d) t)/d
    Widths w{b2 * (1.0 + (inv_b4 + 1.0) * sh * sh), b2 * (1.0 + (inv_b4 - d) * detuned_sin2(d, t))};
    if (!(w.B1sq > 0) || !(w.B2sq > 0)) throw validation_error("widths: non-positive width");
    return w;
}

/// Centre of the u-marginal, c sqrt2 cosh t.
inline double u_centre(const DimensionlessParams& p, double t) { return p.c * std::numbers::sqrt2 * std::cosh(t); }

inline double joint_density(const DimensionlessParams& p, double x, double y, double t) {
    const Widths w = widths(p, t);
    const double u = (x + y) / std::numbers::sqrt2 - u_centre(p, t);
    const double dv = x - y;
    return std::exp(-u * u / w.B1sq - dv * dv / (2.0 * w.B2sq)) / (kPi * std::sqrt(w.B1sq * w.B2sq));
}

/// Pr(F1 and F2 disagree at t) = (2/pi) arctan(B2/B1); closed form only for c = 0.
inline double disagreement_probability(const DimensionlessParams& p, double t) {
    if (p.c != 0.0)
        throw unsupported_case("disagreement_probability: closed form requires c = 0; use quadrant_integral");
    const Widths w = widths(p, t);
    return 2.0 / kPi * std::atan(std::sqrt(w.B2sq / w.B1sq));
}

/// The same probability written in physical units, with t in physical time.
inline double disagreement_probability_physical(const FlipFlopParams& p, double t) {
    p.validate();
    if (p.c != 0.0) throw unsupported_case("disagreement_probability_physical: closed form requires c = 0");
    const double h2 = p.hbar * p.hbar / (p.omega * p.omega * p.m * p.m * std::pow(p.b, 4));
    const double wt = p.omega * t;
    const double d = p.lambda - 1.0;
    const double num = 1.0 + (h2 - d) * detuned_sin2(d, wt);
    const double sh = std::sinh(wt);
    const double den = 1.0 + (h2 + 1.0) * sh * sh;
    return 2.0 / kPi * std::atan(std::sqrt(num / den));
}

inline constexpr double kQuadratureTol = 1e-8;

/// Integral of the joint density over the quadrants x y < 0, for any c.
/// In (u,v) the region is |u| < |v|; integrating u analytically leaves
///   (1/sqrt(pi)) int_0^inf e^{-V^2} [erfc((|mu| - B2 V)/B1) - erfc((|mu| + B2 V)/B1)] dV
/// with mu = c sqrt2 cosh t, evaluated by adaptive Gauss-Kronrod.
inline double quadrant_integral(const DimensionlessParams& p, double t) {
    const Widths w = widths(p, t);
    const double b1 = std::sqrt(w.B1sq);
    const double b2 = std::sqrt(w.B2sq);
    const double mu = std::abs(u_centre(p, t));
    auto f = [&](double v) {
        return std::exp(-v * v) * (std::erfc((mu - b2 * v) / b1) - std::erfc((mu + b2 * v) / b1));
    };
    double err = 0.0;
    // e^{-V^2} < 1e-27 beyond V = 8.
    const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 8.0, 20, 1e-11, &err);
    const double scaled_err = err / std::sqrt(kPi);
    if (!(scaled_err <= kQuadratureTol) || !std::isfinite(val))
        throw accuracy_error("quadrant_integral: quadrature did not converge", scaled_err);
    return std::clamp(val / std::sqrt(kPi), 0.0, 1.0);
}

/// Pr(x > 0), i.e. F1 reads 1. The x-marginal is Gaussian with mean c cosh t
/// and variance (B1^2 + B2^2)/4.
inline double prob_f1_reads_one(const DimensionlessParams& p, double t) {
    const Widths w = widths(p, t);
    const double sigma = std::sqrt((w.B1sq + w.B2sq) / 4.0);
    return 0.5 * std::erfc(-p.c * std::cosh(t) / (sigma * std::numbers::sqrt2));
}

/// Joint outcome probabilities; index is 2*f1 + f2 (f1 = [x>0], f2 = [y>0]).
struct QuadrantProbabilities {
    double p00, p01, p10, p11;
    double disagreement() const { return p01 + p10; }
    double f1_one() const { return p10 + p11; }
};

/// The density is symmetric under x <-> y, so p01 = p10 = P_disagree / 2;
/// the rest follows from Pr(F1 = 1).
inline QuadrantProbabilities quadrant_probabilities(const DimensionlessParams& p, double t) {
    const double dis = p.c == 0.0 ? disagreement_probability(p, t) : quadrant_integral(p, t);
    const double f1 = p.c == 0.0 ? 0.5 : prob_f1_reads_one(p, t);
    QuadrantProbabilities q{0.0, dis / 2.0, dis / 2.0, 0.0};
    q.p11 = std::max(0.0, f1 - dis / 2.0);
    q.p00 = std::max(0.0, 1.0 - f1 - dis / 2.0);
    const double total = q.p00 + q.p01 + q.p10 + q.p11;
    q.p00 /= total;
    q.p01 /= total;
    q.p10 /= total;
    q.p11 /= total;
    return q;
}

/// hbar -> 0 limit at finite b: (2/pi) arctan(|cos(sqrt(lambda-1) t)| / cosh t).
inline double classical_limit_probability(double b, double lambda, double t) {
    if (!(b > 0)) throw validation_error("classical_limit_probability: b must be positive");
    return 2.0 / kPi * std::atan(std::abs(detuned_cos(lambda - 1.0, t)) / std::cosh(t));
}

enum class Provenance { analytic, pde, monte_carlo, classical_limit };

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::analytic: return "analytic";
        case Provenance::pde: return "pde";
        case Provenance::monte_carlo: return "monte-carlo";
        case Provenance::classical_limit: return "classical-limit";
    }
    return "unknown";
}

struct DisagreementCurve {
    std::vector<double> times;
    std::vector<double> probabilities;
    Provenance provenance = Provenance::analytic;

    void validate() const {
        if (times.size() != probabilities.size()) throw validation_error("DisagreementCurve: length mismatch");
        for (double v : probabilities)
            if (!(v >= 0.0 && v <= 1.0)) throw validation_error("DisagreementCurve: probability outside [0,1]");
    }
};

/// Inclusive grid t_min, t_min + step, ..., up to t_max (within step/1e6).
inline std::vector<double> time_grid(double t_min, double t_max, double step) {
    if (!(step > 0) || !(t_max >= t_min)) throw validation_error("time_grid: need step > 0 and t_max >= t_min");
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((t_max - t_min) / step + 1e-6));
    for (long long i = 0; i <= n; ++i) out.push_back(t_min + static_cast<double>(i) * step);
    return out;
}

/// Sampled curve of the physical-units model; times are physical. Uses the closed
/// form when c = 0 and the quadrant quadrature otherwise.
inline DisagreementCurve analytic_curve(const FlipFlopParams& p, const std::vector<double>& times) {
    const DimensionlessParams d = to_dimensionless(p);
    DisagreementCurve curve{times, {}, Provenance::analytic};
    for (double t : times)
        curve.probabilities.push_back(d.c == 0.0 ? disagreement_probability(d, p.omega * t)
                                                 : quadrant_integral(d, p.omega * t));
    return curve;
}

inline DisagreementCurve classical_curve(const FlipFlopParams& p, const std::vector<double>& times) {
    p.validate();
    DisagreementCurve curve{times, {}, Provenance::classical_limit};
    for (double t : times) curve.probabilities.push_back(classical_limit_probability(p.b, p.lambda, p.omega * t));
    return curve;
}

}  // namespace teeter::flipflop
