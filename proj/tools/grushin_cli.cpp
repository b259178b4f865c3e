#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "grushin/runner.hpp"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

}  // namespace

int main(int argc, char** argv) {
    using namespace grushin::runner;

    CLI::App app{"Grushin Schrodinger spectral simulator and experiment harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--seed", seed, "64-bit seed (overrides seed)");
    app.add_option("--threads", threads, "worker threads, 0 = auto (overrides threads)");

    for (const char* name : {"spectrum", "observe", "beam-sweep", "asymptotics", "normalform", "all"}) {
        app.add_subcommand(name)->fallthrough();
    }
    CLI11_PARSE(app, argc, argv);

    const std::string sub = app.get_subcommands().front()->get_name();
    ExperimentConfig config;
    try {
        if (!config_path.empty()) config = load_config(config_path);
        config.kind = *parse_kind(sub);
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (seed) config.seed = *seed;
        if (threads) config.threads = *threads;
        config.validate();
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitConfig;
    }

    RunSummary summary;
    try {
        summary = run(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailed;
    }
    for (const auto& c : summary.contracts) {
        std::printf("[%s] %2d %-26s %s\n", c.passed ? "PASS" : "FAIL", c.id, c.name.c_str(), c.detail.c_str());
    }
    for (const auto& e : summary.experiments) {
        if (e.error) std::fprintf(stderr, "%s: %s\n", e.name.c_str(), e.error->c_str());
    }
    std::printf("summary: %s\n", (config.output_dir / "summary.json").string().c_str());
    return summary.all_passed() ? 0 : kExitFailed;
}
