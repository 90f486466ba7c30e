#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genport/attribution.hpp"
#include "genport/backtest.hpp"
#include "genport/config.hpp"
#include "genport/data.hpp"

namespace genport {

// Everything a run needs, resolved from a Config. Validation reports every
// violated constraint at once.
struct PipelineSettings {
    // data
    std::string csv_path;
    bool synthetic = false;
    int synthetic_steps = 241;
    int synthetic_assets = 4;
    double synthetic_correlation = 0.5;
    double synthetic_vol = 0.03;
    std::uint64_t synthetic_seed = 1;
    int step_days = 2;

    // backtest
    BacktestConfig bt;
    std::vector<ArmSpec> arms;
    std::vector<BanditConfig> bandits;
    std::uint64_t master_seed = 42;
    int n_seeds = 1;

    // attribution
    int cv_folds = 7;
    int grid_points = 100;
    double grid_min_ratio = 1e-4;

    // fetch
    FetchConfig fetch;
    std::vector<std::string> fetch_symbols;

    std::string config_hash;
};

PipelineSettings load_settings(const Config& cfg, std::vector<std::string>& errors);

std::vector<std::uint64_t> path_seeds(const PipelineSettings& s);
ReturnPanel load_panel(const PipelineSettings& s);

struct RunArtifacts {
    std::vector<std::string> files;
};

RunArtifacts run_backtest_cmd(const PipelineSettings& s, const std::string& out_dir);
RunArtifacts run_blend_cmd(const PipelineSettings& s, const std::string& out_dir);
RunArtifacts run_attribute_cmd(const PipelineSettings& s, const std::string& out_dir,
                               AttributionScheme scheme, AttributionMeasure measure);
RunArtifacts run_report_cmd(const PipelineSettings& s, const std::string& out_dir);
RunArtifacts run_fetch_cmd(const PipelineSettings& s, const std::string& out_dir);

// result-file readers used by attribute/report
std::vector<AttributionRecord> read_fixed_records(const std::string& csv_path);
std::vector<AttributionRecord> read_eclectic_records(const std::string& csv_path);

std::string write_manifest(const PipelineSettings& s, const std::string& out_dir,
                           const std::string& command, const std::vector<std::string>& files,
                           std::int64_t started, std::int64_t finished);

}  // namespace genport
