#pragma once

// Config-driven experiment driver. Each experiment family writes its CSV
// artifacts into the output directory and evaluates its share of the twelve
// contracts; summary.json is written last.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace grushin::runner {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kDefaultsVersion = "1";

enum class Kind { spectrum, observe, beam_sweep, asymptotics, normalform, all };

std::optional<Kind> parse_kind(std::string_view name);
std::string kind_name(Kind kind);

/// Invalid configuration; field() names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ExperimentConfig {
    Kind kind = Kind::all;
    std::uint64_t seed = 1;
    int threads = 1;  // 0 = hardware concurrency
    std::filesystem::path output_dir = "out";

    // spectrum
    int grid_M = 4000;
    int mode_cap = 64;
    int levels = 5;
    double weyl_tau_sq = 2000.0;

    // observe (random fields)
    int basis_mode_cap = 32;
    double basis_lambda_max = 200.0;
    int basis_grid_M = 2000;
    int coercivity_fields = 200;
    int conservation_fields = 20;
    std::vector<double> conservation_times{0.1, 1.0, 10.0, 100.0};

    // observability region and window, shared with beam-sweep
    std::vector<std::pair<double, double>> region_arcs;  // empty = complement of |y| < 1
    std::vector<double> T_list{0.8, 1.3};
    int nt = 129;

    // beam-sweep
    std::vector<double> beam_h{0.125, 0.0625, 0.03125, 0.015625};
    int beam_grid_M = 0;  // 0 = smallest grid admitted by every h
    double centroid_h = 0.03125;
    double centroid_t_max = 0.5;
    int centroid_samples = 11;

    // asymptotics
    std::vector<double> w_list{6, 7, 8, 9, 10, 11, 12, 13, 14};
    std::vector<double> triple_w{8, 10, 12};
    std::vector<double> localization_w{20, 30, 40};
    int asym_grid_M = 4000;
    int phase_w = 12;

    // normal form
    std::vector<double> nf_h{0.03125, 0.015625, 0.0078125};
    double eps = 0.1;
    int nf_seeds = 10;
    int nf_nx = 8192;
    int nf_eigen_n = 5;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
    nlohmann::json to_json() const;
    /// Unknown keys and a missing or wrong schema_version are rejected.
    static ExperimentConfig from_json(const nlohmann::json& doc);
};

ExperimentConfig load_config(const std::filesystem::path& path);

struct ContractResult {
    int id = 0;
    std::string name;
    std::string experiment;
    bool passed = false;
    std::string detail;
};

struct ExperimentRecord {
    std::string name;
    double wall_seconds = 0.0;
    std::vector<std::string> artifacts;
    std::optional<std::string> error;
};

struct RunSummary {
    std::string kind;
    std::uint64_t seed = 0;
    std::vector<ContractResult> contracts;
    std::vector<ExperimentRecord> experiments;
    double wall_seconds = 0.0;

    bool all_passed() const;
    nlohmann::json to_json() const;
};

/// Deterministic per-stream seed (splitmix64 of seed and stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Contract ids evaluated by an experiment kind.
std::vector<int> contracts_of(Kind kind);

/// Runs the configured experiments. Module errors are recorded in the
/// summary and mark that experiment's contracts failed.
RunSummary run(const ExperimentConfig& config);

}  // namespace grushin::runner
