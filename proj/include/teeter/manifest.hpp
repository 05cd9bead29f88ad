#pragma once

// Run manifests: what was run (command, options, defaulted config, seed,
// threads), with which library versions, when, and the FNV-1a hash of every
// output file. Replaying a manifest re-runs the command with the recorded
// inputs and compares output hashes.

#include <fftw3.h>

#include <boost/version.hpp>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "teeter/errors.hpp"

namespace teeter::manifest {

using nlohmann::json;

#ifdef TEETER_VERSION
inline constexpr const char* kToolVersion = TEETER_VERSION;
#else
inline constexpr const char* kToolVersion = "0.1.0";
#endif

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline std::string file_hash(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw error("file_hash: cannot read " + p.string());
    std::uint64_t h = kFnvOffset;
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(std::string_view(buf.data(), static_cast<std::size_t>(is.gcount())), h);
    }
    return hex64(h);
}

/// Hash of the compact dump; nlohmann objects keep keys sorted, so this is canonical.
inline std::string json_hash(const json& j) { return hex64(fnv1a64(j.dump())); }

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline json versions() {
    return {{"teeter", kToolVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"fftw", std::string(fftw_version)},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

struct Output {
    std::string path;  // relative to the run's output directory
    std::string fnv1a64;
    std::uintmax_t bytes = 0;
};

struct Manifest {
    std::string command;
    json options = json::object();
    json config;  // defaulted config, or null for commands without one
    std::string config_hash;
    std::uint64_t seed = 0;
    int threads = 1;
    json versions;
    std::string started_at, finished_at;
    json notes = json::object();
    std::vector<Output> outputs;
};

inline json to_json(const Manifest& m) {
    json outs = json::array();
    for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"fnv1a64", o.fnv1a64}, {"bytes", o.bytes}});
    return {{"command", m.command},   {"options", m.options},        {"config", m.config},
            {"configHash", m.config_hash}, {"seed", m.seed},         {"threads", m.threads},
            {"versions", m.versions}, {"startedAt", m.started_at},   {"finishedAt", m.finished_at},
            {"notes", m.notes},       {"outputs", std::move(outs)}};
}

inline Manifest from_json(const json& j) {
    try {
        Manifest m;
        m.command = j.at("command").get<std::string>();
        m.options = j.at("options");
        m.config = j.at("config");
        m.config_hash = j.at("configHash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.threads = j.at("threads").get<int>();
        m.versions = j.at("versions");
        m.started_at = j.at("startedAt").get<std::string>();
        m.finished_at = j.at("finishedAt").get<std::string>();
        m.notes = j.value("notes", json::object());
        for (const auto& o : j.at("outputs"))
            m.outputs.push_back({o.at("path").get<std::string>(), o.at("fnv1a64").get<std::string>(), o.at("bytes").get<std::uintmax_t>()});
        return m;
    } catch (const json::exception& e) {
        throw config_error("manifest", e.what());
    }
}

inline Output describe(const std::filesystem::path& dir, const std::string& rel) {
    return {rel, file_hash(dir / rel), std::filesystem::file_size(dir / rel)};
}

}  // namespace teeter::manifest
