#pragma once

// Signal-probe detector stations: an interaction U on signal (x) probe followed
// by a projective measurement of the probe. Covers single-station amplitudes,
// the signal/probe interchange symmetry, and two-station statistics for an
// entangled signal read by plain probes versus a plain signal read by
// entangled probes.

#include <complex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "teeter/errors.hpp"
#include "teeter/linalg.hpp"
#include "teeter/model_json.hpp"
#include "teeter/qmodel.hpp"
#include "teeter/random_models.hpp"

namespace teeter::ent {

using qm::ProjectiveResolution;

enum class Kind { signal, probe };

struct LabeledState {
    Kind kind;
    std::string q;
    cvec vector;

    LabeledState(Kind k, std::string label, cvec v) : kind(k), q(std::move(label)), vector(std::move(v)) {
        if (vector.size() == 0 || std::abs(vector.norm() - 1.0) > 1e-12)
            throw validation_error("LabeledState '" + q + "': vector must have unit norm");
    }
};

class DetectorStation {
public:
    /// `interaction` acts on signal (x) probe with the signal factor first;
    /// `probe_measurement` acts on the probe factor alone.
    DetectorStation(cmat interaction, Eigen::Index signal_dim, ProjectiveResolution probe_measurement)
        : u_(std::move(interaction)), ds_(signal_dim), e_(std::move(probe_measurement)) {
        require_square(u_, "DetectorStation interaction");
        if (ds_ < 1 || u_.rows() != ds_ * e_.dim())
            throw structural_error("DetectorStation: interaction dimension " + std::to_string(u_.rows()) + " != " +
                                   std::to_string(ds_) + " x " + std::to_string(e_.dim()));
        if (max_abs(u_ * u_.adjoint() - cmat::Identity(u_.rows(), u_.cols())) > 1e-10)
            throw validation_error("DetectorStation: interaction is not unitary within 1e-10");
        const cmat one = cmat::Identity(ds_, ds_);
        for (const auto& p : e_.projections()) lifted_.push_back(kron(one, p));
    }

    const cmat& interaction() const { return u_; }
    Eigen::Index signal_dim() const { return ds_; }
    Eigen::Index probe_dim() const { return e_.dim(); }
    Eigen::Index dim() const { return u_.rows(); }
    const ProjectiveResolution& measurement() const { return e_; }
    /// 1_s (x) E(j).
    const cmat& lifted(std::size_t j) const { return lifted_.at(j); }
    const cmat& lifted(const std::string& j) const { return lifted_[e_.index_of(j)]; }

private:
    cmat u_;
    Eigen::Index ds_;
    ProjectiveResolution e_;
    std::vector<cmat> lifted_;
};

// ---- single station -------------------------------------------------------

/// (1 (x) E(j)) U (s (x) p), unnormalized.
inline cvec amplitude(const DetectorStation& st, const cvec& s, const cvec& p, const std::string& j) {
    if (s.size() != st.signal_dim() || p.size() != st.probe_dim())
        throw structural_error("amplitude: state dimensions do not match the station");
    return st.lifted(j) * (st.interaction() * kron(s, p));
}

inline cvec amplitude(const DetectorStation& st, const LabeledState& s, const LabeledState& p, const std::string& j) {
    if (s.kind != Kind::signal || p.kind != Kind::probe) throw domain_error("amplitude: expected a signal and a probe state");
    return amplitude(st, s.vector, p.vector, j);
}

inline double probability(const DetectorStation& st, const cvec& s, const cvec& p, const std::string& j) {
    return amplitude(st, s, p, j).squaredNorm();
}

/// A family of parameter values q with their signal and probe vectors.
struct FamilyMember {
    std::string q;
    cvec signal;
    cvec probe;
};
using Family = std::vector<FamilyMember>;

/// The family s(q) = p(q) = v(q).
inline Family identical_family(const std::vector<cvec>& vs) {
    Family f;
    for (std::size_t i = 0; i < vs.size(); ++i) f.push_back({"q" + std::to_string(i), vs[i], vs[i]});
    return f;
}

struct SymmetryCheck {
    double max_prob_deviation = 0.0;
};

/// max over (q, q', j) of |Pr(j | s(q), p(q')) - Pr(j | s(q'), p(q))|.
inline SymmetryCheck check_exchange_symmetry(const DetectorStation& st, const Family& family) {
    if (st.signal_dim() != st.probe_dim())
        throw unsupported_case("check_exchange_symmetry: signal and probe factors differ in dimension");
    SymmetryCheck out;
    for (std::size_t a = 0; a < family.size(); ++a)
        for (std::size_t b = a + 1; b < family.size(); ++b)
            for (const auto& j : st.measurement().outcomes()) {
                const double x = probability(st, family[a].signal, family[b].probe, j);
                const double y = probability(st, family[b].signal, family[a].probe, j);
                out.max_prob_deviation = std::max(out.max_prob_deviation, std::abs(x - y));
            }
    return out;
}

struct PhaseRatio {
    cplx ratio;       // <Amp(q',q), Amp(q,q')> / |Amp(q',q)|^2
    double residual;  // |Amp(q,q') - ratio Amp(q',q)|
};

/// Compares Amp(j | s(q), p(q')) with Amp(j | s(q'), p(q)); empty where the
/// second amplitude has norm <= 1e-6 and the phase is undefined.
inline std::optional<PhaseRatio> exchange_phase_ratio(const DetectorStation& st, const FamilyMember& q,
                                                      const FamilyMember& qp, const std::string& j) {
    const cvec a = amplitude(st, q.signal, qp.probe, j);
    const cvec b = amplitude(st, qp.signal, q.probe, j);
    const double nb = b.norm();
    if (nb <= 1e-6) return std::nullopt;
    const cplx r = b.dot(a) / (nb * nb);
    return PhaseRatio{r, (a - r * b).norm()};
}

// ---- station construction ---------------------------------------------------

namespace detail {

/// Orthonormal columns spanning the range of a projector.
inline cmat range_basis(const cmat& p) {
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitian_part(p));
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
    cmat b(p.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(cols[k]);
    return b;
}

/// Orthonormal basis of the symmetric (+1) or antisymmetric (-1) subspace of C^d (x) C^d,
/// rotated by a random unitary within the subspace.
inline cmat swap_eigenspace(Eigen::Index d, int sign, random::Engine& rng) {
    const cmat s = swap_operator(d);
    const cmat proj = 0.5 * (cmat::Identity(d * d, d * d) + static_cast<double>(sign) * s);
    cmat b = range_basis(proj);
    return b * random::unitary(b.cols(), rng);
}

/// U = B W^dagger sends the k-th column of W to the k-th column of B.
inline cmat assemble(const cmat& b, const cmat& w) { return b * w.adjoint(); }

}  // namespace detail

/// Station whose measurement operators U^dagger (1 (x) E(j)) U commute with the
/// factor swap. The swap-invariant spectral basis W of a random Hermitian
/// H = G + S G S consists of swap eigenvectors; U carries consecutive groups of
/// d rank(E(j)) of them onto range(1 (x) E(j)).
inline DetectorStation symmetric_station(const ProjectiveResolution& probe_measurement, random::Engine& rng) {
    const Eigen::Index d = probe_measurement.dim();
    const cmat s = swap_operator(d);
    const cmat g = random::hermitian(d * d, rng);
    Eigen::SelfAdjointEigenSolver<cmat> es(g + s * g * s);
    const cmat w = es.eigenvectors();
    const cmat one = cmat::Identity(d, d);
    cmat b(d * d, d * d);
    Eigen::Index col = 0;
    for (const auto& p : probe_measurement.projections()) {
        cmat r = detail::range_basis(kron(one, p));
        r = r * random::unitary(r.cols(), rng);
        b.middleCols(col, r.cols()) = r;
        col += r.cols();
    }
    return DetectorStation(detail::assemble(b, w), d, probe_measurement);
}

/// Station with U S U^dagger = sum_j e^{i phi_j} (1 (x) E(j)), phi_j in {0, pi}:
/// the symmetric subspace goes to the outcomes with phi = 0. The ranks of
/// those outcomes must add up to (d+1)/2, so d must be odd.
inline DetectorStation phase_covariant_station(const ProjectiveResolution& probe_measurement, random::Engine& rng) {
    const Eigen::Index d = probe_measurement.dim();
    if (d % 2 == 0) throw unsupported_case("phase_covariant_station: needs odd factor dimension");
    const std::size_t m = probe_measurement.size();
    std::vector<Eigen::Index> ranks;
    for (const auto& p : probe_measurement.projections()) ranks.push_back(static_cast<Eigen::Index>(std::llround(p.trace().real())));
    std::optional<unsigned> chosen;
    for (unsigned mask = 0; mask < (1u << m) && !chosen; ++mask) {
        Eigen::Index r = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (mask >> j & 1u) r += ranks[j];
        if (2 * r == d + 1) chosen = mask;
    }
    if (!chosen) throw unsupported_case("phase_covariant_station: no outcome subset has total rank (d+1)/2");
    const cmat one = cmat::Identity(d, d);
    // Columns of B: ranges of the phi = 0 outcomes first, then the phi = pi ones.
    cmat b(d * d, d * d);
    Eigen::Index col = 0;
    for (const bool plus : {true, false})
        for (std::size_t j = 0; j < m; ++j) {
            if (static_cast<bool>(*chosen >> j & 1u) != plus) continue;
            cmat r = detail::range_basis(kron(one, probe_measurement.projection(j)));
            r = r * random::unitary(r.cols(), rng);
            b.middleCols(col, r.cols()) = r;
            col += r.cols();
        }
    cmat w(d * d, d * d);
    w << detail::swap_eigenspace(d, +1, rng), detail::swap_eigenspace(d, -1, rng);
    return DetectorStation(detail::assemble(b, w), d, probe_measurement);
}

/// Haar-random interaction; generically breaks the interchange symmetry.
inline DetectorStation random_station(const ProjectiveResolution& probe_measurement, random::Engine& rng) {
    const Eigen::Index d = probe_measurement.dim();
    return DetectorStation(random::unitary(d * d, rng), d, probe_measurement);
}

// ---- two stations -----------------------------------------------------------

/// N (x1 (x) y1 + e^{i theta} x2 (x) y2); throws when the sum vanishes.
inline cvec entangled_superposition(const cvec& x1, const cvec& y1, const cvec& x2, const cvec& y2, double theta) {
    const cvec v = kron(x1, y1) + std::polar(1.0, theta) * kron(x2, y2);
    const double n = v.norm();
    if (!(n > 1e-12)) throw degenerate_state_error("entangled_superposition: superposition has zero norm");
    return v / n;
}

/// Reorders a vector on (sA (x) sB) (x) (pA (x) pB) into sA (x) pA (x) sB (x) pB.
inline cvec interleave(const cvec& signal, const cvec& probe, Eigen::Index dsa, Eigen::Index dsb, Eigen::Index dpa,
                       Eigen::Index dpb) {
    cvec out(dsa * dpa * dsb * dpb);
    for (Eigen::Index a = 0; a < dsa; ++a)
        for (Eigen::Index b = 0; b < dsb; ++b)
            for (Eigen::Index pa = 0; pa < dpa; ++pa)
                for (Eigen::Index pb = 0; pb < dpb; ++pb)
                    out(((a * dpa + pa) * dsb + b) * dpb + pb) = signal(a * dsb + b) * probe(pa * dpb + pb);
    return out;
}

/// Pr(jA, jB) for a signal on sA (x) sB and a probe state on pA (x) pB. Both
/// inputs are normalized here.
inline double joint_two_station_probability(const DetectorStation& a, const DetectorStation& b, const cvec& signal,
                                            const cvec& probe, const std::string& ja, const std::string& jb) {
    if (signal.size() != a.signal_dim() * b.signal_dim() || probe.size() != a.probe_dim() * b.probe_dim())
        throw structural_error("joint_two_station_probability: state dimensions do not match the stations");
    const double ns = signal.norm(), np = probe.norm();
    if (!(ns > 1e-12) || !(np > 1e-12)) throw degenerate_state_error("joint_two_station_probability: zero input state");
    const cvec psi = interleave(signal / ns, probe / np, a.signal_dim(), b.signal_dim(), a.probe_dim(), b.probe_dim());
    const cvec out = kron(a.lifted(ja), b.lifted(jb)) * (kron(a.interaction(), b.interaction()) * psi);
    return out.squaredNorm();
}

struct SwapEquality {
    double max_deviation = 0.0;
    double symmetry_defect_a = 0.0;
    double symmetry_defect_b = 0.0;
};

/// Compares the entangled-signal configuration
///   N[sA(q1) sB(q2) + e^{i theta} sA(q2) sB(q1)] with probes pA(q0) pB(q0)
/// against the entangled-probe configuration
///   sA(q0) sB(q0) with N[pA(q1) pB(q2) + e^{i theta} pA(q2) pB(q1)].
/// With `enforce`, both stations must pass the interchange check on their
/// families within 1e-10.
inline SwapEquality entanglement_swap_equality(const DetectorStation& a, const DetectorStation& b, const Family& fa,
                                               const Family& fb, double theta, bool enforce = true) {
    if (fa.size() != 3 || fb.size() != 3) throw domain_error("entanglement_swap_equality: families must hold q0, q1, q2");
    SwapEquality out;
    out.symmetry_defect_a = check_exchange_symmetry(a, fa).max_prob_deviation;
    out.symmetry_defect_b = check_exchange_symmetry(b, fb).max_prob_deviation;
    if (enforce && (out.symmetry_defect_a > 1e-10 || out.symmetry_defect_b > 1e-10))
        throw symmetry_precondition_error("entanglement_swap_equality: stations are not interchange-symmetric (defects " +
                                          std::to_string(out.symmetry_defect_a) + ", " +
                                          std::to_string(out.symmetry_defect_b) + ")");
    const cvec sig1 = entangled_superposition(fa[1].signal, fb[2].signal, fa[2].signal, fb[1].signal, theta);
    const cvec prb1 = kron(fa[0].probe, fb[0].probe);
    const cvec sig2 = kron(fa[0].signal, fb[0].signal);
    const cvec prb2 = entangled_superposition(fa[1].probe, fb[2].probe, fa[2].probe, fb[1].probe, theta);
    for (const auto& ja : a.measurement().outcomes())
        for (const auto& jb : b.measurement().outcomes())
            out.max_deviation = std::max(out.max_deviation, std::abs(joint_two_station_probability(a, b, sig1, prb1, ja, jb) -
                                                                     joint_two_station_probability(a, b, sig2, prb2, ja, jb)));
    return out;
}

// ---- JSON -------------------------------------------------------------------

/// {"factors": [ds, dp], "measuredFactor": 1, "interaction": M,
///  "outcomes": [{"label", "projection"}], "family": [{"q", "signal", "probe"}]}
/// Outcome projections act on the measured (probe) factor; "family" is optional.
struct StationSpec {
    DetectorStation station;
    Family family;
};

inline nlohmann::json station_to_json(const DetectorStation& st, const Family& family = {}) {
    nlohmann::json fam = nlohmann::json::array();
    for (const auto& m : family)
        fam.push_back({{"q", m.q}, {"signal", io::vector_to_json(m.signal)}, {"probe", io::vector_to_json(m.probe)}});
    nlohmann::json j{{"factors", {st.signal_dim(), st.probe_dim()}},
                     {"measuredFactor", 1},
                     {"interaction", io::matrix_to_json(st.interaction())},
                     {"outcomes", io::resolution_to_json(st.measurement())}};
    if (!family.empty()) j["family"] = std::move(fam);
    return j;
}

inline StationSpec station_from_json(const nlohmann::json& j, const std::string& path = "$") {
    io::check_keys(j, {"factors", "measuredFactor", "interaction", "outcomes", "family"}, path);
    const auto& f = io::require(j, "factors", path);
    if (!f.is_array() || f.size() != 2 || !f[0].is_number_integer() || !f[1].is_number_integer() || f[0].get<long long>() < 1 ||
        f[1].get<long long>() < 1)
        throw config_error(path + ".factors", "expected [signalDim, probeDim] positive integers");
    const auto ds = static_cast<Eigen::Index>(f[0].get<long long>());
    const auto dp = static_cast<Eigen::Index>(f[1].get<long long>());
    const auto& mf = io::require(j, "measuredFactor", path);
    if (!mf.is_number_integer() || mf.get<long long>() != 1)
        throw config_error(path + ".measuredFactor", "only the probe factor (index 1) can be measured");
    const cmat u = io::matrix_from_json(io::require(j, "interaction", path), ds * dp, path + ".interaction");
    auto e = io::resolution_from_json(io::require(j, "outcomes", path), dp, path + ".outcomes");
    std::optional<DetectorStation> st;
    try {
        st.emplace(u, ds, std::move(e));
    } catch (const error& ex) {
        throw config_error(path + ".interaction", ex.what());
    }
    Family fam;
    if (j.contains("family")) {
        const auto& fj = j.at("family");
        if (!fj.is_array()) throw config_error(path + ".family", "expected an array");
        for (std::size_t i = 0; i < fj.size(); ++i) {
            const std::string p = path + ".family[" + std::to_string(i) + "]";
            io::check_keys(fj[i], {"q", "signal", "probe"}, p);
            FamilyMember m{io::require_string(fj[i], "q", p), io::vector_from_json(io::require(fj[i], "signal", p), ds, p + ".signal"),
                           io::vector_from_json(io::require(fj[i], "probe", p), dp, p + ".probe")};
            if (std::abs(m.signal.norm() - 1.0) > 1e-12 || std::abs(m.probe.norm() - 1.0) > 1e-12)
                throw config_error(p, "family vectors must have unit norm");
            fam.push_back(std::move(m));
        }
    }
    return {std::move(*st), std::move(fam)};
}

}  // namespace teeter::ent
