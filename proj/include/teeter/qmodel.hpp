#pragma once

// Finite-dimensional quantum models: knob-indexed density operators,
// projective resolutions of the identity, a unitary evolution, and the
// trace rule mu(a,b,t)(w) = Tr[U(t) rho(a) U(t)^dag E(b)(w)].

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "teeter/errors.hpp"
#include "teeter/linalg.hpp"

namespace teeter::qm {

inline constexpr double kInvariantTol = 1e-12;
inline constexpr double kProbabilityTol = 1e-10;

class DensityOperator {
public:
    explicit DensityOperator(const cmat& m) {
        require_square(m, "DensityOperator");
        if (hermiticity_defect(m) > kInvariantTol)
            throw validation_error("DensityOperator: matrix is not Hermitian");
        const double tr = m.trace().real();
        if (std::abs(tr - 1.0) > kInvariantTol)
            throw validation_error("DensityOperator: trace " + std::to_string(tr) + " != 1");
        m_ = hermitian_part(m);
        if (hermitian_eigenvalues(m_).minCoeff() < -kInvariantTol)
            throw validation_error("DensityOperator: matrix has a negative eigenvalue");
    }

    static DensityOperator pure(const cvec& v) {
        const double n = v.norm();
        if (n < 1e-12) throw validation_error("DensityOperator::pure: zero vector");
        const cvec u = v / n;
        return DensityOperator(u * u.adjoint());
    }

    static DensityOperator maximally_mixed(Eigen::Index d) {
        return DensityOperator(cmat::Identity(d, d) / static_cast<double>(d));
    }

    const cmat& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    cmat m_;
};

/// Mutually orthogonal projections, one per outcome label, summing to the identity.
class ProjectiveResolution {
public:
    ProjectiveResolution(std::vector<std::string> outcomes, std::vector<cmat> projections)
        : outcomes_(std::move(outcomes)), projections_(std::move(projections)) {
        if (outcomes_.empty() || outcomes_.size() != projections_.size())
            throw structural_error("ProjectiveResolution: need one projection per outcome");
        if (std::set<std::string>(outcomes_.begin(), outcomes_.end()).size() != outcomes_.size())
            throw validation_error("ProjectiveResolution: duplicate outcome label");
        const Eigen::Index d = projections_.front().rows();
        cmat sum = cmat::Zero(d, d);
        for (std::size_t i = 0; i < projections_.size(); ++i) {
            const cmat& p = projections_[i];
            require_square(p, "ProjectiveResolution");
            if (p.rows() != d) throw structural_error("ProjectiveResolution: mixed dimensions");
            if (hermiticity_defect(p) > kInvariantTol)
                throw validation_error("ProjectiveResolution: '" + outcomes_[i] + "' is not self-adjoint");
            if (max_abs(p * p - p) > kInvariantTol)
                throw validation_error("ProjectiveResolution: '" + outcomes_[i] + "' is not idempotent");
            for (std::size_t j = 0; j < i; ++j)
                if (max_abs(p * projections_[j]) > kInvariantTol)
                    throw validation_error("ProjectiveResolution: '" + outcomes_[i] + "' and '" +
                                           outcomes_[j] + "' are not orthogonal");
            sum += p;
        }
        if (max_abs(sum - cmat::Identity(d, d)) > kInvariantTol)
            throw validation_error("ProjectiveResolution: projections do not sum to the identity");
        for (auto& p : projections_) p = hermitian_part(p);
    }

    /// Rank-one projections onto the standard basis, labelled "0".."d-1".
    static ProjectiveResolution computational(Eigen::Index d) {
        std::vector<std::string> labels;
        std::vector<cmat> ps;
        for (Eigen::Index i = 0; i < d; ++i) {
            labels.push_back(std::to_string(i));
            cmat p = cmat::Zero(d, d);
            p(i, i) = 1.0;
            ps.push_back(p);
        }
        return ProjectiveResolution(std::move(labels), std::move(ps));
    }

    Eigen::Index dim() const { return projections_.front().rows(); }
    std::size_t size() const { return outcomes_.size(); }
    const std::vector<std::string>& outcomes() const { return outcomes_; }
    const std::vector<cmat>& projections() const { return projections_; }
    const cmat& projection(std::size_t i) const { return projections_.at(i); }

    std::size_t index_of(const std::string& label) const {
        auto it = std::find(outcomes_.begin(), outcomes_.end(), label);
        if (it == outcomes_.end()) throw domain_error("unknown outcome label '" + label + "'");
        return static_cast<std::size_t>(it - outcomes_.begin());
    }
    bool has_outcome(const std::string& label) const {
        return std::find(outcomes_.begin(), outcomes_.end(), label) != outcomes_.end();
    }
    const cmat& projection(const std::string& label) const { return projections_[index_of(label)]; }

private:
    std::vector<std::string> outcomes_;
    std::vector<cmat> projections_;
};

/// U(t) = exp(-i H t), evaluated exactly through the eigendecomposition of H.
class UnitaryEvolution {
public:
    explicit UnitaryEvolution(const cmat& generator) {
        require_square(generator, "UnitaryEvolution");
        if (hermiticity_defect(generator) > kInvariantTol)
            throw validation_error("UnitaryEvolution: generator is not Hermitian");
        h_ = hermitian_part(generator);
        Eigen::SelfAdjointEigenSolver<cmat> es(h_);
        energies_ = es.eigenvalues();
        basis_ = es.eigenvectors();
    }

    static UnitaryEvolution identity(Eigen::Index d) { return UnitaryEvolution(cmat::Zero(d, d)); }

    cmat at(double t) const {
        cvec phases(energies_.size());
        for (Eigen::Index i = 0; i < energies_.size(); ++i) phases(i) = std::polar(1.0, -energies_(i) * t);
        return basis_ * phases.asDiagonal() * basis_.adjoint();
    }

    const cmat& generator() const { return h_; }
    Eigen::Index dim() const { return h_.rows(); }

private:
    cmat h_;
    rvec energies_;
    cmat basis_;
};

template <class T>
using Labeled = std::vector<std::pair<std::string, T>>;

template <class T>
const T& lookup(const Labeled<T>& items, const std::string& label, const char* kind) {
    for (const auto& [l, v] : items)
        if (l == label) return v;
    throw domain_error(std::string("unknown ") + kind + " knob '" + label + "'");
}

/// The triple (rho, E, U) over knob sets A and B.
class SpecificQuantumModel {
public:
    SpecificQuantumModel(Labeled<DensityOperator> states, Labeled<ProjectiveResolution> measurements,
                         UnitaryEvolution evolution)
        : states_(std::move(states)), measurements_(std::move(measurements)), evolution_(std::move(evolution)) {
        if (states_.empty() || measurements_.empty())
            throw domain_error("SpecificQuantumModel: knob sets must be nonempty");
        const Eigen::Index d = evolution_.dim();
        std::set<std::string> seen;
        for (const auto& [label, rho] : states_) {
            if (!seen.insert(label).second) throw domain_error("duplicate A knob '" + label + "'");
            if (rho.dim() != d) throw structural_error("state '" + label + "' has the wrong dimension");
        }
        seen.clear();
        for (const auto& [label, e] : measurements_) {
            if (!seen.insert(label).second) throw domain_error("duplicate B knob '" + label + "'");
            if (e.dim() != d) throw structural_error("measurement '" + label + "' has the wrong dimension");
        }
    }

    Eigen::Index dim() const { return evolution_.dim(); }
    const Labeled<DensityOperator>& states() const { return states_; }
    const Labeled<ProjectiveResolution>& measurements() const { return measurements_; }
    const UnitaryEvolution& evolution() const { return evolution_; }

    const DensityOperator& state(const std::string& a) const { return lookup(states_, a, "A"); }
    const ProjectiveResolution& measurement(const std::string& b) const { return lookup(measurements_, b, "B"); }

    std::vector<std::string> knobs_a() const {
        std::vector<std::string> out;
        for (const auto& s : states_) out.push_back(s.first);
        return out;
    }
    std::vector<std::string> knobs_b() const {
        std::vector<std::string> out;
        for (const auto& m : measurements_) out.push_back(m.first);
        return out;
    }

private:
    Labeled<DensityOperator> states_;
    Labeled<ProjectiveResolution> measurements_;
    UnitaryEvolution evolution_;
};

namespace detail {
inline double checked_probability(double raw) {
    if (!(raw >= -kProbabilityTol && raw <= 1.0 + kProbabilityTol))
        throw validation_error("probability " + std::to_string(raw) + " outside [0,1]");
    return std::clamp(raw, 0.0, 1.0);
}
}  // namespace detail

/// Tr[A B] for square matrices of equal size, without forming the product.
inline cplx trace_of_product(const cmat& a, const cmat& b) {
    return (a.array() * b.transpose().array()).sum();
}

inline cmat evolved_state(const SpecificQuantumModel& model, const std::string& a, double t) {
    const cmat u = model.evolution().at(t);
    return u * model.state(a).matrix() * u.adjoint();
}

/// mu(a,b,t)(w).
inline double probability(const SpecificQuantumModel& model, const std::string& a, const std::string& b,
                          double t, const std::string& outcome) {
    const auto& e = model.measurement(b);
    const cmat& p = e.projection(outcome);
    return detail::checked_probability(trace_of_product(evolved_state(model, a, t), p).real());
}

/// The full outcome distribution of measurement b, ordered like its outcome labels.
inline std::vector<double> distribution(const SpecificQuantumModel& model, const std::string& a,
                                        const std::string& b, double t) {
    const auto& e = model.measurement(b);
    const cmat rho_t = evolved_state(model, a, t);
    std::vector<double> out;
    out.reserve(e.size());
    for (const auto& p : e.projections()) out.push_back(detail::checked_probability(trace_of_product(rho_t, p).real()));
    return out;
}

/// Tr[rho1^{1/2} rho2^{1/2}].
inline double overlap(const DensityOperator& rho1, const DensityOperator& rho2) {
    require_same_dim(rho1.matrix(), rho2.matrix(), "overlap");
    const cmat s1 = psd_sqrt(rho1.matrix());
    const cmat s2 = psd_sqrt(rho2.matrix());
    return std::clamp(trace_of_product(s1, s2).real(), 0.0, 1.0);
}

/// Model on a subset of the knob domain; shares every retained operator.
inline SpecificQuantumModel restrict(const SpecificQuantumModel& model, const std::vector<std::string>& sub_a,
                                     const std::vector<std::string>& sub_b) {
    if (sub_a.empty() || sub_b.empty()) throw domain_error("restrict: knob subsets must be nonempty");
    Labeled<DensityOperator> states;
    for (const auto& a : sub_a) states.emplace_back(a, model.state(a));
    Labeled<ProjectiveResolution> meas;
    for (const auto& b : sub_b) meas.emplace_back(b, model.measurement(b));
    return SpecificQuantumModel(std::move(states), std::move(meas), model.evolution());
}

/// Applies X -> V X V^dag to every state, projection and the generator.
inline SpecificQuantumModel conjugated(const SpecificQuantumModel& model, const cmat& v) {
    require_same_dim(v, model.evolution().generator(), "conjugated");
    auto conj = [&](const cmat& x) -> cmat { return hermitian_part(v * x * v.adjoint()); };
    Labeled<DensityOperator> states;
    for (const auto& [label, rho] : model.states()) states.emplace_back(label, DensityOperator(conj(rho.matrix())));
    Labeled<ProjectiveResolution> meas;
    for (const auto& [label, e] : model.measurements()) {
        std::vector<cmat> ps;
        for (const auto& p : e.projections()) ps.push_back(conj(p));
        meas.emplace_back(label, ProjectiveResolution(e.outcomes(), std::move(ps)));
    }
    return SpecificQuantumModel(std::move(states), std::move(meas),
                                UnitaryEvolution(conj(model.evolution().generator())));
}

/// One row of a probability table: (a, b, t, outcome) -> mu.
struct TableEntry {
    std::string a, b;
    double t;
    std::string outcome;
    double mu;
};

/// Enumerates mu over every knob pair and outcome at the given times.
inline std::vector<TableEntry> probability_table(const SpecificQuantumModel& model, const std::vector<double>& times) {
    std::vector<TableEntry> out;
    for (double t : times)
        for (const auto& [a, rho] : model.states())
            for (const auto& [b, e] : model.measurements()) {
                const auto dist = distribution(model, a, b, t);
                for (std::size_t k = 0; k < dist.size(); ++k) out.push_back({a, b, t, e.outcomes()[k], dist[k]});
            }
    return out;
}

/// Sup-norm distance between the tables of two models with the same domain.
inline double table_distance(const SpecificQuantumModel& m1, const SpecificQuantumModel& m2,
                             const std::vector<double>& times) {
    double worst = 0.0;
    for (double t : times)
        for (const auto& a : m1.knobs_a())
            for (const auto& b : m1.knobs_b()) {
                const auto& e1 = m1.measurement(b);
                const auto& e2 = m2.measurement(b);
                for (const auto& w : e1.outcomes()) {
                    if (!e2.has_outcome(w)) throw domain_error("table_distance: outcome sets differ");
                    worst = std::max(worst, std::abs(probability(m1, a, b, t, w) - probability(m2, a, b, t, w)));
                }
            }
    return worst;
}

}  // namespace teeter::qm
