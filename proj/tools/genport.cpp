#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "genport/pipeline.hpp"

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void info(const std::string& msg) {
    if (g_log_level >= 1) std::fprintf(stderr, "%s\n", msg.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generative-model portfolio construction, blending and attribution"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int n_seeds = 0;  // 0 = use config value
    int jobs = 0;
    std::string log_level = "info";
    app.add_option("--config", config_path, "config file (TOML-style)")->required();
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--seeds", n_seeds, "number of independent seeds (overrides config)");
    app.add_option("--jobs", jobs, "worker threads (default: all cores)");
    app.add_option("--log-level", log_level, "quiet|info|debug");

    auto* cmd_fetch = app.add_subcommand("fetch", "retrieve candles into a price csv");
    auto* cmd_backtest = app.add_subcommand("backtest", "run the fixed-arm grid");
    auto* cmd_blend = app.add_subcommand("blend", "run the eclectic (bandit) grid");
    auto* cmd_attribute = app.add_subcommand("attribute", "LASSO performance attribution");
    auto* cmd_report = app.add_subcommand("report", "emit plot-ready csv files");
    // global flags may appear after the subcommand
    for (auto* sub : {cmd_fetch, cmd_backtest, cmd_blend, cmd_attribute, cmd_report})
        sub->fallthrough();

    std::string scheme = "fixed";
    std::string measure = "logit-cosine";
    cmd_attribute->add_option("--scheme", scheme, "fixed|eclectic");
    cmd_attribute->add_option("--measure", measure, "simple-return|logit-cosine");

    CLI11_PARSE(app, argc, argv);

    if (log_level == "quiet") g_log_level = 0;
    else if (log_level == "debug") g_log_level = 2;
    if (jobs > 0) omp_set_num_threads(jobs);

    genport::Config cfg;
    genport::PipelineSettings settings;
    try {
        cfg = genport::Config::parse_file(config_path);
        std::vector<std::string> errors;
        settings = genport::load_settings(cfg, errors);
        if (n_seeds > 0) settings.n_seeds = n_seeds;
        if (cmd_attribute->parsed()) {
            if (scheme != "fixed" && scheme != "eclectic")
                errors.push_back("--scheme must be fixed or eclectic");
            if (measure != "simple-return" && measure != "logit-cosine")
                errors.push_back("--measure must be simple-return or logit-cosine");
        }
        if (!errors.empty()) {
            for (const auto& e : errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
            return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }

    try {
        genport::RunArtifacts art;
        if (cmd_fetch->parsed()) {
            art = genport::run_fetch_cmd(settings, out_dir);
        } else if (cmd_backtest->parsed()) {
            art = genport::run_backtest_cmd(settings, out_dir);
        } else if (cmd_blend->parsed()) {
            art = genport::run_blend_cmd(settings, out_dir);
        } else if (cmd_attribute->parsed()) {
            art = genport::run_attribute_cmd(
                settings, out_dir,
                scheme == "fixed" ? genport::AttributionScheme::FixedArm
                                  : genport::AttributionScheme::Eclectic,
                measure == "simple-return" ? genport::AttributionMeasure::SimpleReturn
                                           : genport::AttributionMeasure::LogitCosine);
        } else if (cmd_report->parsed()) {
            art = genport::run_report_cmd(settings, out_dir);
        }
        for (const auto& f : art.files) info("wrote " + f);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
