#pragma once

// JSON-configured experiment runner: builds systems, runs test batteries and
// writes report.csv, verdicts/*.json, series/*.csv and the materialized config.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "symdyn/generators.hpp"
#include "symdyn/symbolic.hpp"

namespace symdyn::exp {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCacheEnvVar = "SYMDYN_CACHE_DIR";

// Invalid configuration. `where` is "line N, field a.b[2].c" style context.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(where) {}
    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

struct SystemSpec {
    std::string name;
    std::string generator;
    nlohmann::json params;  // materialized, generator-specific
    std::size_t length = 0;
};

struct TestSpec {
    std::string test;
    nlohmann::json params;  // materialized, includes "test"
    std::vector<std::string> systems;  // empty: every system
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::size_t horizon = 1 << 16;
    std::size_t depth_cap = kDefaultDepthCap;
    std::string output_dir = "symdyn-out";
    std::vector<SystemSpec> systems;
    std::vector<TestSpec> tests;
    // Execution settings; never affect outputs and are not materialized.
    std::optional<std::filesystem::path> cache_dir;
    std::size_t threads = 1;
};

struct Overrides {
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> depth_cap;
    std::optional<std::size_t> threads;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> output_dir;
};

// Parses and validates; unknown fields and type errors raise ConfigError.
ExperimentConfig parse_config(const std::string& text, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

// Every default filled in; re-parsing it gives the same config.
nlohmann::json materialize(const ExperimentConfig& config);

struct BuiltSystem {
    SystemSpec spec;
    SymbolicSequence sequence;
    std::optional<gen::PaperExampleMeta> meta;
    bool from_cache = false;
};

BuiltSystem build_system(const SystemSpec& spec, const std::optional<std::filesystem::path>& cache_dir);

struct ReportRow {
    std::string system;
    std::string test;
    nlohmann::json params;
    std::optional<double> statistic;
    std::optional<double> bias;
    std::string verdict;
    std::optional<double> a_ratio;
    double wall_seconds = 0.0;
};

struct RunSummary {
    std::vector<ReportRow> rows;
    std::filesystem::path output_dir;
    nlohmann::json hierarchy = nlohmann::json::array();  // one entry per hierarchy test
};

RunSummary run_experiment(const ExperimentConfig& config);

std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
// Raw preset config; unknown names raise ConfigError.
nlohmann::json preset_config(const std::string& name);

// report.csv body without the timestamp line.
std::string report_csv(const std::vector<ReportRow>& rows);
std::string summary_table(const RunSummary& summary);

}  // namespace symdyn::exp
