// teeter: reproducible runs of the flip-flop model, the PDE cross-check, the
// randomized verification suites, the source-discrimination experiment and
// model export. See README.md and docs/config.md.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "teeter/commands.hpp"

namespace {

using teeter::cli::json;

int load_and_run(const std::string& command, const std::string& path, const json& options,
                 const teeter::cli::Context& ctx) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        std::cerr << "error: " << path << ": cannot open config file\n";
        return teeter::cli::kExitUsage;
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    json raw;
    try {
        // Syntax check with line/column diagnostics; field checks happen in execute().
        teeter::cfg::parse_config(ss.str(), path);
        raw = json::parse(ss.str());
    } catch (const teeter::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return teeter::cli::kExitUsage;
    }
    return teeter::cli::execute(command, options, raw, ctx);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"teeter: flip-flop teetering model, PDE cross-check and verification suites"};
    app.require_subcommand(1);
    teeter::cli::Context ctx;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized commands (overrides config seeds)");
    app.add_option("--out-dir", out_dir, "Directory receiving outputs and manifest.json");
    app.add_option("--threads", ctx.threads, "Worker threads")->check(CLI::Range(1, 256));

    std::string config;
    bool classical = false, with_pde = false, plot_script = false;
    auto* curve = app.add_subcommand("curve", "Disagreement-probability curves over the configured time grid");
    curve->add_option("config", config, "Config file")->required();
    curve->add_flag("--classical", classical, "Also write the classical-limit curve");
    curve->add_flag("--pde", with_pde, "Also write the split-step PDE curve");
    curve->add_flag("--plot-script", plot_script, "Write plot_curve.py (matplotlib) next to the CSVs");

    auto* pde = app.add_subcommand("pde", "Split-step run to pde.t_final with snapshots");
    pde->add_option("config", config, "Config file")->required();

    std::string suite;
    std::size_t samples = 200;
    auto* verify = app.add_subcommand("verify", "Randomized verification suites");
    verify->add_option("suite", suite, "prop1, prop2, prop3, prop4, reduction, entangle-swap or all")->required();
    verify->add_option("--samples", samples, "Random instances per suite")->check(CLI::PositiveNumber);

    auto* discriminate = app.add_subcommand("discriminate", "Monte-Carlo discrimination of two sources");
    discriminate->add_option("config", config, "Config file")->required();

    std::string kind = "model";
    int dim = 3, outcomes = 2;
    std::size_t knobs_a = 3, knobs_b = 2;
    auto* exp = app.add_subcommand("export-model", "Write a random model or detector station as JSON");
    exp->add_option("--kind", kind, "model, symmetric-station or phase-covariant-station")
        ->check(CLI::IsMember({"model", "symmetric-station", "phase-covariant-station"}));
    exp->add_option("--dim", dim, "Hilbert-space (factor) dimension")->check(CLI::Range(1, 64));
    exp->add_option("--outcomes", outcomes, "Outcomes per resolution (at most dim)")->check(CLI::Range(1, 64));
    exp->add_option("--knobs-a", knobs_a, "Preparation knobs");
    exp->add_option("--knobs-b", knobs_b, "Measurement knobs");

    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare output hashes");
    replay->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : teeter::cli::kExitUsage;
    }
    ctx.out_dir = out_dir;
    if (seed_opt->count()) ctx.seed = seed;

    if (curve->parsed())
        return load_and_run("curve", config, {{"classical", classical}, {"pde", with_pde}, {"plot_script", plot_script}}, ctx);
    if (pde->parsed()) return load_and_run("pde", config, json::object(), ctx);
    if (discriminate->parsed()) return load_and_run("discriminate", config, json::object(), ctx);
    if (verify->parsed()) {
        if (!teeter::verify::is_suite(suite)) {
            std::cerr << "error: unknown suite '" << suite << "'\n";
            return teeter::cli::kExitUsage;
        }
        return teeter::cli::execute("verify", {{"suite", suite}, {"samples", samples}}, nullptr, ctx);
    }
    if (exp->parsed())
        return teeter::cli::execute(
            "export-model", {{"kind", kind}, {"dim", dim}, {"outcomes", outcomes}, {"knobs_a", knobs_a}, {"knobs_b", knobs_b}},
            nullptr, ctx);
    if (!app.get_option("--out-dir")->count()) ctx.out_dir = std::filesystem::path(manifest_path).parent_path() / "replay";
    return teeter::cli::replay(manifest_path, ctx);
}
