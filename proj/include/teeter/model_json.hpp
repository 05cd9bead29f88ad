#pragma once

// JSON form of a SpecificQuantumModel:
//   {"dim": n,
//    "knobsA": [{"label": "...", "rho": M}],
//    "knobsB": [{"label": "...", "outcomes": [{"label": "...", "projection": M}]}],
//    "hamiltonian": M}
// where M is a list of rows and each entry is a [re, im] pair.

#include <json.hpp>
#include <set>
#include <string>

#include "teeter/errors.hpp"
#include "teeter/qmodel.hpp"

namespace teeter::io {

using nlohmann::json;

inline json matrix_to_json(const cmat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_to_json(const cvec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
    return out;
}

inline cplx complex_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw config_error(path, "expected a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline cvec vector_from_json(const json& j, Eigen::Index dim, const std::string& path) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim)
        throw config_error(path, "expected a vector of " + std::to_string(dim) + " complex entries");
    cvec v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = complex_from_json(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    return v;
}

inline cmat matrix_from_json(const json& j, Eigen::Index dim, const std::string& path) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim)
        throw config_error(path, "expected " + std::to_string(dim) + " rows");
    cmat m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim)
            throw config_error(rp, "expected " + std::to_string(dim) + " entries");
        for (Eigen::Index k = 0; k < dim; ++k)
            m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)], rp + "[" + std::to_string(k) + "]");
    }
    return m;
}

/// Rejects keys outside `allowed`.
inline void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
    if (!obj.is_object()) throw config_error(path, "expected an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key())) throw config_error(path + "." + item.key(), "unknown key");
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw config_error(path + "." + key, "missing required key");
    return obj.at(key);
}

inline std::string require_string(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_string()) throw config_error(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline json resolution_to_json(const qm::ProjectiveResolution& e) {
    json outs = json::array();
    for (std::size_t k = 0; k < e.size(); ++k)
        outs.push_back({{"label", e.outcomes()[k]}, {"projection", matrix_to_json(e.projection(k))}});
    return outs;
}

inline qm::ProjectiveResolution resolution_from_json(const json& outs, Eigen::Index dim, const std::string& path) {
    if (!outs.is_array() || outs.empty()) throw config_error(path, "expected a nonempty outcome list");
    std::vector<std::string> labels;
    std::vector<cmat> ps;
    for (std::size_t k = 0; k < outs.size(); ++k) {
        const std::string op = path + "[" + std::to_string(k) + "]";
        check_keys(outs[k], {"label", "projection"}, op);
        labels.push_back(require_string(outs[k], "label", op));
        ps.push_back(matrix_from_json(require(outs[k], "projection", op), dim, op + ".projection"));
    }
    try {
        return qm::ProjectiveResolution(std::move(labels), std::move(ps));
    } catch (const error& e) {
        throw config_error(path, e.what());
    }
}

inline json model_to_json(const qm::SpecificQuantumModel& model) {
    json a = json::array();
    for (const auto& [label, rho] : model.states()) a.push_back({{"label", label}, {"rho", matrix_to_json(rho.matrix())}});
    json b = json::array();
    for (const auto& [label, e] : model.measurements())
        b.push_back({{"label", label}, {"outcomes", resolution_to_json(e)}});
    return {{"dim", model.dim()},
            {"knobsA", std::move(a)},
            {"knobsB", std::move(b)},
            {"hamiltonian", matrix_to_json(model.evolution().generator())}};
}

inline qm::SpecificQuantumModel model_from_json(const json& j, const std::string& path = "$") {
    check_keys(j, {"dim", "knobsA", "knobsB", "hamiltonian"}, path);
    const auto& dj = require(j, "dim", path);
    if (!dj.is_number_integer() || dj.get<long long>() < 1) throw config_error(path + ".dim", "expected a positive integer");
    const auto dim = static_cast<Eigen::Index>(dj.get<long long>());

    qm::Labeled<qm::DensityOperator> states;
    const auto& ka = require(j, "knobsA", path);
    if (!ka.is_array()) throw config_error(path + ".knobsA", "expected an array");
    for (std::size_t i = 0; i < ka.size(); ++i) {
        const std::string p = path + ".knobsA[" + std::to_string(i) + "]";
        check_keys(ka[i], {"label", "rho"}, p);
        const auto label = require_string(ka[i], "label", p);
        const cmat m = matrix_from_json(require(ka[i], "rho", p), dim, p + ".rho");
        try {
            states.emplace_back(label, qm::DensityOperator(m));
        } catch (const error& e) {
            throw config_error(p + ".rho", e.what());
        }
    }

    qm::Labeled<qm::ProjectiveResolution> meas;
    const auto& kb = require(j, "knobsB", path);
    if (!kb.is_array()) throw config_error(path + ".knobsB", "expected an array");
    for (std::size_t i = 0; i < kb.size(); ++i) {
        const std::string p = path + ".knobsB[" + std::to_string(i) + "]";
        check_keys(kb[i], {"label", "outcomes"}, p);
        const auto label = require_string(kb[i], "label", p);
        meas.emplace_back(label, resolution_from_json(require(kb[i], "outcomes", p), dim, p + ".outcomes"));
    }

    const cmat h = matrix_from_json(require(j, "hamiltonian", path), dim, path + ".hamiltonian");
    try {
        return qm::SpecificQuantumModel(std::move(states), std::move(meas), qm::UnitaryEvolution(h));
    } catch (const config_error&) {
        throw;
    } catch (const error& e) {
        throw config_error(path, e.what());
    }
}

}  // namespace teeter::io
