// Runs every experiment family with the default configuration and reports
// one PASS/FAIL line per contract, including the runtime budgets.

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "grushin/runner.hpp"

namespace fs = std::filesystem;
using namespace grushin::runner;

namespace {

// wall-clock budget in seconds per contract; 0 = none
const std::map<int, double> kBudget{
    {1, 120.0}, {2, 120.0}, {3, 60.0}, {5, 180.0}, {9, 600.0},
};

}  // namespace

int main(int argc, char** argv) {
    fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "grushin_acceptance";
    fs::remove_all(out);

    int failed = 0;
    for (Kind kind : {Kind::spectrum, Kind::observe, Kind::asymptotics, Kind::beam_sweep, Kind::normalform}) {
        ExperimentConfig config;
        config.kind = kind;
        config.output_dir = out / kind_name(kind);
        const RunSummary summary = run(config);
        const double wall = summary.experiments.at(0).wall_seconds;
        if (summary.experiments.at(0).error) {
            std::printf("  %s error: %s\n", kind_name(kind).c_str(), summary.experiments[0].error->c_str());
        }
        for (const auto& c : summary.contracts) {
            bool ok = c.passed;
            std::string detail = c.detail;
            if (auto it = kBudget.find(c.id); it != kBudget.end()) {
                char buf[96];
                std::snprintf(buf, sizeof buf, " wall=%.1fs budget=%.0fs", wall, it->second);
                detail += buf;
                if (wall > it->second) {
                    ok = false;
                    detail += " (over budget)";
                }
            }
            if (!ok) ++failed;
            std::printf("%s criterion %2d %-26s %s\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), detail.c_str());
            std::fflush(stdout);
        }
    }
    std::printf("%d of 12 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
