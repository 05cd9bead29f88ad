#pragma once

// Subcommand bodies behind the `teeter` executable. Each command takes its
// options as JSON so a manifest can replay it verbatim, writes its outputs
// under Context::out_dir together with manifest.json, and returns an exit code:
// 0 success, 1 assertion failure or runtime error, 2 usage or config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "teeter/config.hpp"
#include "teeter/discrimination.hpp"
#include "teeter/entanglement.hpp"
#include "teeter/flipflop.hpp"
#include "teeter/manifest.hpp"
#include "teeter/model_json.hpp"
#include "teeter/pde.hpp"
#include "teeter/random_models.hpp"
#include "teeter/verify.hpp"

namespace teeter::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Context {
    fs::path out_dir = "out";
    std::optional<std::uint64_t> seed;  // overrides any seed in the config
    int threads = 1;
    std::ostream* err = &std::cerr;
};

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::string> outputs;  // relative to out_dir
    json notes = json::object();
    std::uint64_t seed = 0;
};

// ---- writers ----------------------------------------------------------------

inline std::ofstream open_out(const fs::path& dir, const std::string& name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw error("cannot write " + (dir / name).string());
    os.precision(17);
    return os;
}

inline void write_json(const fs::path& dir, const std::string& name, const json& j) {
    auto os = open_out(dir, name);
    os << j.dump(2) << '\n';
}

/// Header "t,probability,provenance".
inline void write_curve_csv(std::ostream& os, const flipflop::DisagreementCurve& c) {
    os.precision(17);
    os << "t,probability,provenance\n";
    const std::string prov = flipflop::to_string(c.provenance);
    for (std::size_t i = 0; i < c.times.size(); ++i) os << c.times[i] << ',' << c.probabilities[i] << ',' << prov << '\n';
}

inline const char* kPlotScript = R"py(# Plots the disagreement curves written by `teeter curve`.
import csv, glob, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

for path in sorted(glob.glob("curve_*.csv")):
    with open(path) as f:
        rows = list(csv.DictReader(f))
    if rows:
        plt.plot([float(r["t"]) for r in rows], [float(r["probability"]) for r in rows], label=rows[0]["provenance"])
plt.xlabel("t")
plt.ylabel("P(disagree)")
plt.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "curve.png", dpi=150)
)py";

// ---- commands -----------------------------------------------------------------

inline double analytic_value(const flipflop::DimensionlessParams& d, double tau) {
    return d.c == 0.0 ? flipflop::disagreement_probability(d, tau) : flipflop::quadrant_integral(d, tau);
}

/// Options {classical, pde, plot_script}. PDE samples are taken at the curve's
/// times; domain exhaustion truncates that curve and is reported.
inline RunResult run_curve(const cfg::Config& c, const json& opt, const Context& ctx) {
    RunResult r;
    const auto times = c.flipflop.times();
    const auto& p = c.flipflop.params;
    auto write = [&](const std::string& name, const flipflop::DisagreementCurve& curve) {
        curve.validate();
        auto os = open_out(ctx.out_dir, name);
        write_curve_csv(os, curve);
        r.outputs.push_back(name);
    };
    write("curve_analytic.csv", flipflop::analytic_curve(p, times));
    if (opt.value("classical", false)) write("curve_classical.csv", flipflop::classical_curve(p, times));
    if (opt.value("pde", false)) {
        const cfg::PdeSection ps = c.pde.value_or(cfg::PdeSection{});
        const auto d = flipflop::to_dimensionless(p);
        for (double t : times) {
            const double steps = p.omega * t / ps.dt;
            if (std::abs(steps - std::round(steps)) > 1e-6)
                throw config_error("$.pde.dt", "curve times must be whole multiples of dt (t = " + std::to_string(t) + ")");
        }
        flipflop::DisagreementCurve curve{{}, {}, flipflop::Provenance::pde};
        auto f = pde::init_gaussian(ps.grid(), d);
        pde::SplitStepSolver solver(ps.grid(), d, ctx.threads);
        try {
            for (double t : times) {
                solver.advance_to(f, p.omega * t);
                curve.times.push_back(t);
                curve.probabilities.push_back(pde::quadrant_probability(f));
            }
        } catch (const domain_exhausted& e) {
            const double tt = e.last_valid_time / p.omega;
            *ctx.err << "warning: PDE domain exhausted; curve_pde.csv is truncated at t = " << tt << '\n';
            r.notes["pdeTruncatedAt"] = tt;
        }
        write("curve_pde.csv", curve);
    }
    if (opt.value("plot_script", false)) {
        auto os = open_out(ctx.out_dir, "plot_curve.py");
        os << kPlotScript;
        r.outputs.push_back("plot_curve.py");
    }
    return r;
}

/// Runs the PDE to pde.t_final, writing the quadrant series and snapshots.
inline RunResult run_pde(const cfg::Config& c, const json&, const Context& ctx) {
    RunResult r;
    const cfg::PdeSection ps = c.pde.value_or(cfg::PdeSection{});
    const auto d = flipflop::to_dimensionless(c.flipflop.params);
    auto f = pde::init_gaussian(ps.grid(), d);
    pde::SplitStepSolver solver(ps.grid(), d, ctx.threads);
    const auto total = static_cast<std::size_t>(std::llround(ps.t_final / ps.dt));
    const std::size_t every = ps.snapshot_every ? ps.snapshot_every : std::max<std::size_t>(total, 1);
    std::ostringstream series;
    series.precision(17);
    series << "step,t,quadrant,analytic\n";
    auto record = [&](std::size_t k, bool snapshot) {
        series << k << ',' << f.time << ',' << pde::quadrant_probability(f) << ',' << analytic_value(d, f.time) << '\n';
        if (!snapshot) return;
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%08zu.bin", k);
        pde::write_snapshot((ctx.out_dir / name).string(), f);
        r.outputs.push_back(name);
        std::snprintf(name, sizeof name, "marginals_%08zu.csv", k);
        pde::write_marginals_csv((ctx.out_dir / name).string(), f);
        r.outputs.push_back(name);
    };
    record(0, ps.snapshot_every != 0);
    std::size_t k = 0;
    try {
        while (k < total) {
            const std::size_t n = std::min(every, total - k);
            solver.step(f, n);
            k += n;
            record(k, true);
        }
    } catch (const domain_exhausted& e) {
        *ctx.err << "warning: PDE domain exhausted at t = " << e.last_valid_time << "; run stopped\n";
        r.notes["pdeTruncatedAt"] = e.last_valid_time;
    }
    auto os = open_out(ctx.out_dir, "pde_series.csv");
    os << series.str();
    r.outputs.insert(r.outputs.begin(), "pde_series.csv");
    return r;
}

/// Options {suite, samples}.
inline RunResult run_verify(const json& opt, const Context& ctx) {
    RunResult r;
    r.seed = ctx.seed.value_or(1);
    const std::string suite = opt.at("suite").get<std::string>();
    const auto samples = opt.at("samples").get<std::size_t>();
    if (!verify::is_suite(suite)) throw config_error("suite", "unknown suite '" + suite + "'");
    std::vector<std::string> names = suite == "all" ? verify::suite_names() : std::vector<std::string>{suite};
    json reports = json::array();
    std::size_t failures = 0;
    for (const auto& name : names) {
        const auto rep = verify::run_suite(name, samples, r.seed);
        failures += rep.failures;
        *ctx.err << name << ": " << rep.samples << " samples, " << rep.failures << " failures, worst margin "
                 << rep.worst_margin << '\n';
        reports.push_back(verify::to_json(rep));
    }
    const std::string file = "verify_" + suite + ".json";
    write_json(ctx.out_dir, file, suite == "all" ? json{{"suites", reports}, {"failures", failures}} : reports[0]);
    r.outputs.push_back(file);
    r.exit_code = failures ? kExitFailure : kExitOk;
    return r;
}

inline RunResult run_discriminate(const cfg::Config& c, const json&, const Context& ctx) {
    if (!c.discrimination) throw config_error("$.discrimination", "section required by discriminate");
    const auto& ds = *c.discrimination;
    RunResult r;
    r.seed = ctx.seed.value_or(ds.seed);
    std::vector<disc::TrialRecord> log;
    disc::DiscriminateOptions o;
    o.calibrate = ds.calibrate;
    o.threads = ctx.threads;
    o.log = &log;
    const auto rep = disc::discriminate(ds.sources[0], ds.sources[1], ds.waiting_times, ds.trials_per_run, r.seed, o);
    {
        auto os = open_out(ctx.out_dir, "trials.csv");
        disc::write_trials_csv(os, log);
    }
    write_json(ctx.out_dir, "discrimination_report.json", disc::report_to_json(rep));
    r.outputs = {"trials.csv", "discrimination_report.json"};
    *ctx.err << "headline |z| = " << rep.headline << '\n';
    return r;
}

/// Options {kind: model | symmetric-station | phase-covariant-station, dim, knobs_a, knobs_b, outcomes}.
inline RunResult run_export_model(const json& opt, const Context& ctx) {
    RunResult r;
    r.seed = ctx.seed.value_or(1);
    random::Engine rng(r.seed);
    const std::string kind = opt.value("kind", "model");
    const auto dim = opt.value("dim", 3);
    const auto outcomes = opt.value("outcomes", 2);
    if (dim < 1) throw config_error("dim", "must be >= 1");
    if (outcomes < 1) throw config_error("outcomes", "must be >= 1");
    json out;
    if (kind == "model") {
        const random::ModelShape shape{dim, opt.value("knobs_a", std::size_t{3}), opt.value("knobs_b", std::size_t{2}),
                                       static_cast<std::size_t>(outcomes)};
        out = io::model_to_json(random::model(shape, rng));
    } else if (kind == "symmetric-station" || kind == "phase-covariant-station") {
        const auto e = random::resolution(dim, static_cast<std::size_t>(outcomes), rng);
        const auto st = kind == "symmetric-station" ? ent::symmetric_station(e, rng) : ent::phase_covariant_station(e, rng);
        std::vector<cvec> vs;
        for (int i = 0; i < 3; ++i) vs.push_back(random::unit_vector(dim, rng));
        out = ent::station_to_json(st, ent::identical_family(vs));
    } else {
        throw config_error("kind", "expected model, symmetric-station or phase-covariant-station");
    }
    write_json(ctx.out_dir, "model.json", out);
    r.outputs.push_back("model.json");
    return r;
}

// ---- dispatch -----------------------------------------------------------------

inline bool needs_config(const std::string& command) {
    return command == "curve" || command == "pde" || command == "discriminate";
}

/// Runs a command and writes manifest.json. `config` is the raw document
/// (null for commands without one). Errors are mapped to exit codes here.
inline int execute(const std::string& command, const json& options, const json& config, const Context& ctx,
                   manifest::Manifest* written = nullptr) {
    manifest::Manifest m;
    m.command = command;
    m.options = options;
    m.threads = ctx.threads;
    m.versions = manifest::versions();
    m.started_at = manifest::utc_now();
    RunResult r;
    try {
        std::optional<cfg::Config> c;
        if (needs_config(command)) {
            c = cfg::config_from_json(config);
            m.config = cfg::to_json(*c);
            m.config_hash = manifest::json_hash(m.config);
        }
        fs::create_directories(ctx.out_dir);
        if (command == "curve") r = run_curve(*c, options, ctx);
        else if (command == "pde") r = run_pde(*c, options, ctx);
        else if (command == "discriminate") r = run_discriminate(*c, options, ctx);
        else if (command == "verify") r = run_verify(options, ctx);
        else if (command == "export-model") r = run_export_model(options, ctx);
        else throw config_error("command", "unknown command '" + command + "'");
    } catch (const config_error& e) {
        *ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const calibration_error& e) {
        *ctx.err << "error: " << e.what() << "\ncalibration trace:\n";
        for (const auto& line : e.trace) *ctx.err << "  " << line << '\n';
        return kExitFailure;
    } catch (const error& e) {
        *ctx.err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    m.seed = r.seed;
    m.notes = r.notes;
    for (const auto& o : r.outputs) m.outputs.push_back(manifest::describe(ctx.out_dir, o));
    m.finished_at = manifest::utc_now();
    write_json(ctx.out_dir, "manifest.json", manifest::to_json(m));
    if (written) *written = m;
    return r.exit_code;
}

/// Re-runs a manifest into ctx.out_dir and compares every output hash.
inline int replay(const fs::path& manifest_path, const Context& ctx) {
    manifest::Manifest m;
    try {
        std::ifstream is(manifest_path);
        if (!is) throw config_error(manifest_path.string(), "cannot open manifest");
        m = manifest::from_json(json::parse(is));
    } catch (const json::parse_error& e) {
        *ctx.err << "error: " << manifest_path.string() << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const config_error& e) {
        *ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (fs::weakly_canonical(ctx.out_dir) == fs::weakly_canonical(manifest_path.parent_path())) {
        *ctx.err << "error: replay output directory must differ from the manifest's directory\n";
        return kExitUsage;
    }
    Context rc = ctx;
    rc.seed = m.seed;
    rc.threads = m.threads;
    manifest::Manifest again;
    const int code = execute(m.command, m.options, m.config, rc, &again);
    if (code == kExitUsage) return code;
    bool same = again.outputs.size() == m.outputs.size();
    for (std::size_t i = 0; same && i < m.outputs.size(); ++i) {
        const auto& a = m.outputs[i];
        const auto& b = again.outputs[i];
        if (a.path != b.path || a.fnv1a64 != b.fnv1a64 || a.bytes != b.bytes) {
            *ctx.err << "mismatch: " << a.path << " (" << a.fnv1a64 << " vs " << b.fnv1a64 << ")\n";
            same = false;
        }
    }
    if (again.outputs.size() != m.outputs.size()) *ctx.err << "mismatch: output file lists differ\n";
    *ctx.err << (same ? "replay reproduced all outputs\n" : "replay differs\n");
    return same ? code : kExitFailure;
}

}  // namespace teeter::cli
