#pragma once

// Seeded generators of random operators and models for property sweeps.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "teeter/qmodel.hpp"

namespace teeter::random {

using Engine = std::mt19937_64;

inline cmat ginibre(Eigen::Index rows, Eigen::Index cols, Engine& rng) {
    std::normal_distribution<double> n;
    cmat g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = cplx(n(rng), n(rng));
    return g;
}

inline cvec unit_vector(Eigen::Index d, Engine& rng) {
    cvec v = ginibre(d, 1, rng).col(0);
    return v / v.norm();
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
inline cmat unitary(Eigen::Index d, Engine& rng) {
    Eigen::HouseholderQR<cmat> qr(ginibre(d, d, rng));
    cmat q = qr.householderQ();
    const cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < d; ++i) {
        const double a = std::abs(r(i, i));
        if (a > 0) q.col(i) *= r(i, i) / a;
    }
    return q;
}

inline cmat hermitian(Eigen::Index d, Engine& rng, double scale = 1.0) {
    const cmat g = ginibre(d, d, rng);
    return hermitian_part(g) * scale;
}

/// Random density operator of the given rank (0 means full rank).
inline qm::DensityOperator density(Eigen::Index d, Engine& rng, Eigen::Index rank = 0) {
    if (rank <= 0 || rank > d) rank = d;
    const cmat g = ginibre(d, rank, rng);
    cmat rho = g * g.adjoint();
    rho /= rho.trace().real();
    return qm::DensityOperator(hermitian_part(rho));
}

/// Splits a random orthonormal basis into `outcomes` nonempty groups of columns.
inline qm::ProjectiveResolution resolution(Eigen::Index d, std::size_t outcomes, Engine& rng,
                                           const std::vector<std::string>& labels = {}) {
    outcomes = std::clamp<std::size_t>(outcomes, 1, static_cast<std::size_t>(d));
    const cmat u = unitary(d, rng);
    // Every group gets one column; the rest are assigned at random.
    std::vector<std::size_t> owner(static_cast<std::size_t>(d));
    std::iota(owner.begin(), owner.begin() + static_cast<std::ptrdiff_t>(outcomes), std::size_t{0});
    std::uniform_int_distribution<std::size_t> pick(0, outcomes - 1);
    for (std::size_t i = outcomes; i < owner.size(); ++i) owner[i] = pick(rng);
    std::shuffle(owner.begin(), owner.end(), rng);
    std::vector<cmat> ps(outcomes, cmat::Zero(d, d));
    for (Eigen::Index c = 0; c < d; ++c) ps[owner[static_cast<std::size_t>(c)]] += u.col(c) * u.col(c).adjoint();
    std::vector<std::string> names = labels;
    for (std::size_t i = names.size(); i < outcomes; ++i) names.push_back("w" + std::to_string(i));
    names.resize(outcomes);
    return qm::ProjectiveResolution(names, ps);
}

struct ModelShape {
    Eigen::Index dim = 3;
    std::size_t knobs_a = 3;
    std::size_t knobs_b = 2;
    std::size_t max_outcomes = 3;
};

/// Random model with knobs "a0.." and "b0..". Some states are pure so the
/// overlap bounds get exercised near saturation.
inline qm::SpecificQuantumModel model(const ModelShape& shape, Engine& rng) {
    qm::Labeled<qm::DensityOperator> states;
    std::uniform_int_distribution<Eigen::Index> rank(1, shape.dim);
    for (std::size_t i = 0; i < shape.knobs_a; ++i)
        states.emplace_back("a" + std::to_string(i), density(shape.dim, rng, rank(rng)));
    qm::Labeled<qm::ProjectiveResolution> meas;
    const std::size_t hi = std::max<std::size_t>(2, std::min<std::size_t>(shape.max_outcomes, shape.dim));
    std::uniform_int_distribution<std::size_t> outs(std::min<std::size_t>(2, hi), hi);
    for (std::size_t i = 0; i < shape.knobs_b; ++i)
        meas.emplace_back("b" + std::to_string(i), resolution(shape.dim, outs(rng), rng));
    return qm::SpecificQuantumModel(std::move(states), std::move(meas),
                                    qm::UnitaryEvolution(hermitian(shape.dim, rng)));
}

inline qm::SpecificQuantumModel model(const ModelShape& shape, std::uint64_t seed) {
    Engine rng(seed);
    return model(shape, rng);
}

}  // namespace teeter::random
