#pragma once

// Overlap and resolution bounds, the direct-sum constructions that show
// the bounds admit no converse, and Bayes conditioning versus the
// reduced density operator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "teeter/qmodel.hpp"

namespace teeter::props {

using qm::DensityOperator;
using qm::ProjectiveResolution;
using qm::SpecificQuantumModel;
using qm::UnitaryEvolution;

struct KnobTime {
    std::string knob;
    double t;
};

struct Prop1Result {
    double overlap_value;
    double bound;
    bool holds;
    double margin() const { return bound - overlap_value; }
};

/// Overlap(rho(a1), rho(a2)) <= min_{b,t,w} sqrt(mu(a2,b,t)(w)) + sqrt(1 - mu(a1,b,t)(w)).
inline Prop1Result prop1_bound(const SpecificQuantumModel& model, const std::string& a1, const std::string& a2,
                               const std::vector<KnobTime>& sweep) {
    if (a1 == a2) throw domain_error("prop1_bound: knobs must be distinct");
    if (sweep.empty()) throw domain_error("prop1_bound: empty sweep");
    const double ov = qm::overlap(model.state(a1), model.state(a2));
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& [b, t] : sweep) {
        const auto mu1 = qm::distribution(model, a1, b, t);
        const auto mu2 = qm::distribution(model, a2, b, t);
        for (std::size_t w = 0; w < mu1.size(); ++w)
            bound = std::min(bound, std::sqrt(mu2[w]) + std::sqrt(std::max(0.0, 1.0 - mu1[w])));
    }
    return {ov, bound, ov <= bound + 1e-9};
}

/// Threefold direct sum; a1 and a2 are moved into private blocks so their overlap vanishes.
inline SpecificQuantumModel prop2_construct(const SpecificQuantumModel& alpha, const std::string& a1,
                                            const std::string& a2) {
    if (a1 == a2) throw domain_error("prop2_construct: knobs must be distinct");
    alpha.state(a1);
    alpha.state(a2);
    const Eigen::Index n = alpha.dim();
    const cmat zero = cmat::Zero(n, n);

    qm::Labeled<DensityOperator> states;
    for (const auto& [label, rho] : alpha.states()) {
        const cmat& r = rho.matrix();
        cmat m = label == a1 ? direct_sum({zero, r, zero}) : label == a2 ? direct_sum({zero, zero, r})
                                                                         : direct_sum({r, zero, zero});
        states.emplace_back(label, DensityOperator(m));
    }
    qm::Labeled<ProjectiveResolution> meas;
    for (const auto& [label, e] : alpha.measurements()) {
        std::vector<cmat> ps;
        for (const auto& p : e.projections()) ps.push_back(direct_sum({p, p, p}));
        meas.emplace_back(label, ProjectiveResolution(e.outcomes(), std::move(ps)));
    }
    const cmat& h = alpha.evolution().generator();
    return SpecificQuantumModel(std::move(states), std::move(meas), UnitaryEvolution(direct_sum({h, h, h})));
}

struct Prop3Result {
    double norm_diff;
    double lower_bound;
    bool holds;
    double margin() const { return norm_diff - lower_bound; }
};

/// ||E(b1)(c) - E(b2)(c)|| >= max_{a,t} |mu(a,b1,t)(c) - mu(a,b2,t)(c)|.
inline Prop3Result prop3_bound(const SpecificQuantumModel& model, const std::string& b1, const std::string& b2,
                               const std::string& outcome, const std::vector<KnobTime>& sweep) {
    const cmat& p1 = model.measurement(b1).projection(outcome);
    const cmat& p2 = model.measurement(b2).projection(outcome);
    const double nd = operator_norm(p1 - p2);
    double lb = 0.0;
    for (const auto& [a, t] : sweep)
        lb = std::max(lb, std::abs(qm::probability(model, a, b1, t, outcome) - qm::probability(model, a, b2, t, outcome)));
    return {nd, lb, nd >= lb - 1e-9};
}

/// Extends the space by an orthogonal copy H_perp (dim H_perp = dim H_alpha).
/// E(b1)(c) absorbs 1_perp, E(b2)(c) gets 0_perp. Every other resolution
/// routes 1_perp to a sink outcome: for b2 the lexicographically smallest
/// label other than c, for the remaining knobs the smallest label overall.
inline SpecificQuantumModel prop4_construct(const SpecificQuantumModel& alpha, const std::string& b1,
                                            const std::string& b2, const std::string& outcome) {
    if (b1 == b2) throw domain_error("prop4_construct: knobs must be distinct");
    alpha.measurement(b1).index_of(outcome);
    alpha.measurement(b2).index_of(outcome);
    const Eigen::Index n = alpha.dim();
    const cmat zero = cmat::Zero(n, n);
    const cmat one = cmat::Identity(n, n);

    qm::Labeled<DensityOperator> states;
    for (const auto& [label, rho] : alpha.states()) states.emplace_back(label, DensityOperator(direct_sum({rho.matrix(), zero})));

    qm::Labeled<ProjectiveResolution> meas;
    for (const auto& [label, e] : alpha.measurements()) {
        std::string sink;
        if (label == b1) {
            sink = outcome;
        } else {
            for (const auto& w : e.outcomes()) {
                if (label == b2 && w == outcome) continue;
                if (sink.empty() || w < sink) sink = w;
            }
            if (sink.empty())
                throw unsupported_case("prop4_construct: resolution '" + label +
                                       "' has no outcome other than '" + outcome + "' to absorb 1_perp");
        }
        std::vector<cmat> ps;
        for (std::size_t k = 0; k < e.size(); ++k)
            ps.push_back(direct_sum({e.projection(k), e.outcomes()[k] == sink ? one : zero}));
        meas.emplace_back(label, ProjectiveResolution(e.outcomes(), std::move(ps)));
    }
    return SpecificQuantumModel(std::move(states), std::move(meas),
                                UnitaryEvolution(direct_sum({alpha.evolution().generator(), zero})));
}

// ---- bipartite measurements and state reduction --------------------------

inline void require_bipartite(const DensityOperator& rho, const ProjectiveResolution& ea,
                              const ProjectiveResolution& eb) {
    if (rho.dim() != ea.dim() * eb.dim())
        throw structural_error("bipartite: state dimension " + std::to_string(rho.dim()) + " != " +
                               std::to_string(ea.dim()) + " x " + std::to_string(eb.dim()));
}

/// Tr[rho (E_A(j) (x) E_B(k))].
inline double joint_probability(const DensityOperator& rho, const ProjectiveResolution& ea,
                                const ProjectiveResolution& eb, const std::string& j, const std::string& k) {
    require_bipartite(rho, ea, eb);
    const cmat e = kron(ea.projection(j), eb.projection(k));
    return qm::detail::checked_probability(qm::trace_of_product(rho.matrix(), e).real());
}

/// (E rho E) / Tr[E rho E] for E = E_A(j) (x) 1_B.
inline DensityOperator reduced_density(const DensityOperator& rho, const cmat& ea_j, Eigen::Index dim_b) {
    if (rho.dim() != ea_j.rows() * dim_b) throw structural_error("reduced_density: factor dimensions do not match");
    const cmat e = kron(ea_j, cmat::Identity(dim_b, dim_b));
    const cmat m = e * rho.matrix() * e;
    const double p = m.trace().real();
    if (!(p > 1e-12)) throw null_event_error("reduced_density: conditioning on a null event (probability " +
                                             std::to_string(p) + ")");
    return DensityOperator(hermitian_part(m / p));
}

struct ReductionCheck {
    double max_deviation = 0.0;
    std::vector<std::string> skipped;  // outcomes j with Pr(j) <= 1e-10
};

/// Compares Pr(k|j) from Bayes' rule on the joint distribution with Tr[rho_red(j) (1 (x) E_B(k))].
inline ReductionCheck reduction_theorem_check(const DensityOperator& rho, const ProjectiveResolution& ea,
                                              const ProjectiveResolution& eb) {
    require_bipartite(rho, ea, eb);
    ReductionCheck out;
    const Eigen::Index da = ea.dim();
    for (const auto& j : ea.outcomes()) {
        std::vector<double> joint;
        double pj = 0.0;
        for (const auto& k : eb.outcomes()) {
            joint.push_back(joint_probability(rho, ea, eb, j, k));
            pj += joint.back();
        }
        if (pj <= 1e-10) {
            out.skipped.push_back(j);
            continue;
        }
        const DensityOperator red = reduced_density(rho, ea.projection(j), eb.dim());
        for (std::size_t k = 0; k < eb.size(); ++k) {
            const cmat ek = kron(cmat::Identity(da, da), eb.projection(k));
            const double via_red = qm::trace_of_product(red.matrix(), ek).real();
            out.max_deviation = std::max(out.max_deviation, std::abs(joint[k] / pj - via_red));
        }
    }
    return out;
}

// ---- conflicting models ---------------------------------------------------

struct DiscriminationFinding {
    cmat projection;       // E' on the space of beta
    double gap_beta;       // Tr[rho_b(a1) E'] - Tr[rho_b(a2) E']
    double best_gap_alpha; // sup over projections P of Tr[(rho_a(a1) - rho_a(a2)) P]
    bool conflict;         // beta separates the pair strictly better than alpha can
};

/// For a pair of models with equal tables, looks for a projection outside the
/// models' resolutions on which beta predicts a larger separation of a1 from
/// a2 than any projection can in alpha. Finding none is not an error.
inline DiscriminationFinding find_discriminating_projection(const SpecificQuantumModel& alpha,
                                                            const SpecificQuantumModel& beta, const std::string& a1,
                                                            const std::string& a2) {
    auto positive_part_projector = [](const cmat& diff) {
        Eigen::SelfAdjointEigenSolver<cmat> es(diff);
        cmat p = cmat::Zero(diff.rows(), diff.cols());
        for (Eigen::Index i = 0; i < diff.rows(); ++i)
            if (es.eigenvalues()(i) > 1e-12) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
        return p;
    };
    const cmat db = beta.state(a1).matrix() - beta.state(a2).matrix();
    const cmat da = alpha.state(a1).matrix() - alpha.state(a2).matrix();
    const cmat pb = positive_part_projector(db);
    const cmat pa = positive_part_projector(da);
    const double gb = qm::trace_of_product(db, pb).real();
    const double ga = qm::trace_of_product(da, pa).real();
    return {pb, gb, ga, gb > ga + 1e-9};
}

}  // namespace teeter::props
