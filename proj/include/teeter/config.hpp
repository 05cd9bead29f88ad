#pragma once

// Run configuration shared by every subcommand: one JSON document with
// optional sections "flipflop", "pde" and "discrimination". Unknown keys are
// errors. Missing keys take the defaults below. `to_json` emits the fully
// defaulted form, which is what gets hashed and replayed.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "teeter/discrimination.hpp"
#include "teeter/errors.hpp"
#include "teeter/flipflop.hpp"
#include "teeter/model_json.hpp"
#include "teeter/pde.hpp"

namespace teeter::cfg {

using nlohmann::json;

struct FlipFlopSection {
    flipflop::FlipFlopParams params;
    double t_min = 0.0;
    double t_max = 3.0;
    double t_step = 0.01;

    std::vector<double> times() const { return flipflop::time_grid(t_min, t_max, t_step); }
};

/// Grid and step in the dimensionless units of the flip-flop model
/// (lengths over sqrt(hbar/(m omega)), times multiplied by omega).
struct PdeSection {
    double extent = 32.0;
    std::size_t points = 1024;
    double dt = 5e-4;
    std::size_t snapshot_every = 0;  // steps between snapshots; 0 writes only the final field
    double t_final = 2.0;

    pde::GridSpec grid() const { return {extent, points, dt}; }
};

struct DiscriminationSection {
    std::vector<disc::SourceModel> sources;  // exactly two
    std::vector<double> waiting_times{0.5, 1.0, 1.5};
    std::size_t trials_per_run = 100000;
    std::uint64_t seed = 1;
    bool calibrate = true;
};

struct Config {
    FlipFlopSection flipflop;
    std::optional<PdeSection> pde;
    std::optional<DiscriminationSection> discrimination;
};

namespace detail {

inline double number(const json& obj, const std::string& key, const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw config_error(path + "." + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw config_error(path + "." + key, "must be finite");
    return x;
}

inline double positive(const json& obj, const std::string& key, const std::string& path, double fallback) {
    const double x = number(obj, key, path, fallback);
    if (!(x > 0)) throw config_error(path + "." + key, "must be > 0");
    return x;
}

inline std::uint64_t count(const json& obj, const std::string& key, const std::string& path, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw config_error(path + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error(path, "expected an object");
}

}  // namespace detail

inline FlipFlopSection flipflop_from_json(const json& j, const std::string& path) {
    detail::require_object(j, path);
    io::check_keys(j, {"omega", "m", "hbar", "b", "c", "lambda", "t_min", "t_max", "t_step"}, path);
    FlipFlopSection s;
    auto& p = s.params;
    p.omega = detail::positive(j, "omega", path, p.omega);
    p.m = detail::positive(j, "m", path, p.m);
    p.hbar = detail::positive(j, "hbar", path, p.hbar);
    p.b = detail::positive(j, "b", path, p.b);
    p.c = detail::number(j, "c", path, p.c);
    p.lambda = detail::number(j, "lambda", path, p.lambda);
    s.t_min = detail::number(j, "t_min", path, s.t_min);
    s.t_max = detail::number(j, "t_max", path, s.t_max);
    s.t_step = detail::positive(j, "t_step", path, s.t_step);
    if (s.t_min < 0) throw config_error(path + ".t_min", "must be >= 0");
    if (s.t_max < s.t_min) throw config_error(path + ".t_max", "must be >= t_min");
    return s;
}

inline PdeSection pde_from_json(const json& j, const std::string& path) {
    detail::require_object(j, path);
    io::check_keys(j, {"extent", "points", "dt", "snapshot_every", "t_final"}, path);
    PdeSection s;
    s.extent = detail::positive(j, "extent", path, s.extent);
    s.points = detail::count(j, "points", path, s.points);
    s.dt = detail::positive(j, "dt", path, s.dt);
    s.snapshot_every = detail::count(j, "snapshot_every", path, s.snapshot_every);
    s.t_final = detail::number(j, "t_final", path, s.t_final);
    if (s.t_final < 0) throw config_error(path + ".t_final", "must be >= 0");
    try {
        s.grid().validate();
    } catch (const validation_error& e) {
        throw config_error(path + ".points", e.what());
    }
    const double steps = s.t_final / s.dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) throw config_error(path + ".t_final", "must be a whole number of steps dt");
    return s;
}

inline disc::SourceModel source_from_json(const json& j, const std::string& path) {
    detail::require_object(j, path);
    io::check_keys(j, {"label", "kind", "c0", "sigma", "b", "lambda"}, path);
    const std::string label = io::require_string(j, "label", path);
    const std::string kind = io::require_string(j, "kind", path);
    const flipflop::DimensionlessParams base{detail::positive(j, "b", path, 0.556), 0.0, detail::number(j, "lambda", path, 1.81)};
    const double c0 = detail::number(j, "c0", path, 0.0);
    try {
        if (kind == "constant") {
            if (j.contains("sigma")) throw config_error(path + ".sigma", "not allowed for a constant source");
            return disc::SourceModel::constant(label, c0, base);
        }
        if (kind == "gaussianJitter") {
            const double sigma = detail::number(j, "sigma", path, 0.0);
            if (sigma < 0) throw config_error(path + ".sigma", "must be >= 0");
            return disc::SourceModel::gaussian_jitter(label, c0, sigma, base);
        }
    } catch (const validation_error& e) {
        throw config_error(path, e.what());
    }
    throw config_error(path + ".kind", "expected \"constant\" or \"gaussianJitter\", got \"" + kind + "\"");
}

inline DiscriminationSection discrimination_from_json(const json& j, const std::string& path) {
    detail::require_object(j, path);
    io::check_keys(j, {"sources", "waiting_times", "trials_per_run", "seed", "calibrate"}, path);
    DiscriminationSection s;
    const auto& src = io::require(j, "sources", path);
    if (!src.is_array() || src.size() != 2) throw config_error(path + ".sources", "expected an array of exactly two sources");
    for (std::size_t i = 0; i < 2; ++i) s.sources.push_back(source_from_json(src[i], path + ".sources[" + std::to_string(i) + "]"));
    if (s.sources[0].label == s.sources[1].label) throw config_error(path + ".sources[1].label", "labels must differ");
    if (j.contains("waiting_times")) {
        const auto& ts = j.at("waiting_times");
        if (!ts.is_array() || ts.empty()) throw config_error(path + ".waiting_times", "expected a non-empty array");
        s.waiting_times.clear();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const std::string p = path + ".waiting_times[" + std::to_string(i) + "]";
            if (!ts[i].is_number() || !(ts[i].get<double>() >= 0) || !std::isfinite(ts[i].get<double>()))
                throw config_error(p, "expected a finite number >= 0");
            s.waiting_times.push_back(ts[i].get<double>());
        }
    }
    s.trials_per_run = detail::count(j, "trials_per_run", path, s.trials_per_run);
    if (s.trials_per_run == 0) throw config_error(path + ".trials_per_run", "must be >= 1");
    s.seed = detail::count(j, "seed", path, s.seed);
    if (j.contains("calibrate")) {
        if (!j.at("calibrate").is_boolean()) throw config_error(path + ".calibrate", "expected a boolean");
        s.calibrate = j.at("calibrate").get<bool>();
    }
    return s;
}

inline Config config_from_json(const json& j) {
    detail::require_object(j, "$");
    io::check_keys(j, {"flipflop", "pde", "discrimination"}, "$");
    Config c;
    if (j.contains("flipflop")) c.flipflop = flipflop_from_json(j.at("flipflop"), "$.flipflop");
    if (j.contains("pde")) c.pde = pde_from_json(j.at("pde"), "$.pde");
    if (j.contains("discrimination")) c.discrimination = discrimination_from_json(j.at("discrimination"), "$.discrimination");
    return c;
}

/// Parses JSON text; syntax errors are reported as "<source>:<line>:<column>: ...".
inline Config parse_config(const std::string& text, const std::string& source = "<config>") {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw config_error(source + ":" + std::to_string(line) + ":" + std::to_string(col), "JSON syntax error");
    }
    return config_from_json(j);
}

inline Config load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error(path, "cannot open config file");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path);
}

inline json to_json(const FlipFlopSection& s) {
    const auto& p = s.params;
    return {{"omega", p.omega}, {"m", p.m},         {"hbar", p.hbar},   {"b", p.b},          {"c", p.c},
            {"lambda", p.lambda}, {"t_min", s.t_min}, {"t_max", s.t_max}, {"t_step", s.t_step}};
}

inline json to_json(const PdeSection& s) {
    return {{"extent", s.extent}, {"points", s.points}, {"dt", s.dt}, {"snapshot_every", s.snapshot_every}, {"t_final", s.t_final}};
}

inline json to_json(const disc::SourceModel& s) {
    json j{{"label", s.label}, {"kind", disc::to_string(s.kind)}, {"c0", s.c0}, {"b", s.base.b}, {"lambda", s.base.lambda}};
    if (s.kind == disc::SourceModel::Kind::gaussian_jitter) j["sigma"] = s.sigma;
    return j;
}

inline json to_json(const DiscriminationSection& s) {
    return {{"sources", {to_json(s.sources[0]), to_json(s.sources[1])}},
            {"waiting_times", s.waiting_times},
            {"trials_per_run", s.trials_per_run},
            {"seed", s.seed},
            {"calibrate", s.calibrate}};
}

inline json to_json(const Config& c) {
    json j{{"flipflop", to_json(c.flipflop)}};
    if (c.pde) j["pde"] = to_json(*c.pde);
    if (c.discrimination) j["discrimination"] = to_json(*c.discrimination);
    return j;
}

}  // namespace teeter::cfg
