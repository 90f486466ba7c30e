#include "genport/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "genport/rng.hpp"

namespace fs = std::filesystem;

namespace genport {

namespace {

std::string slug(std::string s) {
    for (char& c : s) {
        if (c == ' ') c = '-';
        else if (c == '|') c = '_';
        else if (c == '.') c = 'p';
    }
    return s;
}

std::string file_fnv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char out[20];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

PipelineSettings load_settings(const Config& cfg, std::vector<std::string>& errors) {
    PipelineSettings s;
    s.config_hash = cfg.hash();

    auto fail = [&](const std::string& msg) { errors.push_back(msg); };

    // [data]
    s.csv_path = cfg.str_or("data", "csv", "");
    s.synthetic = cfg.bool_or("data", "synthetic", s.csv_path.empty());
    s.synthetic_steps = static_cast<int>(cfg.int_or("data", "synthetic_steps", 241));
    s.synthetic_assets = static_cast<int>(cfg.int_or("data", "synthetic_assets", 4));
    s.synthetic_correlation = cfg.num_or("data", "synthetic_correlation", 0.5);
    s.synthetic_vol = cfg.num_or("data", "synthetic_vol", 0.03);
    s.synthetic_seed = static_cast<std::uint64_t>(cfg.int_or("data", "synthetic_seed", 1));
    s.step_days = static_cast<int>(cfg.int_or("data", "step_days", 2));
    if (!s.synthetic && s.csv_path.empty()) fail("[data] csv path or synthetic = true required");
    if (s.step_days < 1) fail("[data] step_days must be positive");

    // [backtest]
    s.bt.fit_window = static_cast<int>(cfg.int_or("backtest", "fit_window", 91));
    s.bt.blend_window = static_cast<int>(cfg.int_or("backtest", "blend_window", 26));
    s.bt.c = cfg.num_or("backtest", "c", 0.005);
    s.bt.m = cfg.num_or("backtest", "m", 5.0);
    s.bt.n_scenarios = static_cast<int>(cfg.int_or("backtest", "n_scenarios", 1000));
    s.bt.leaky_relu_verbatim = cfg.bool_or("backtest", "leaky_relu_verbatim", true);
    s.bt.bernado_ledoit_classical = cfg.bool_or("backtest", "bernado_ledoit_classical", false);
    s.bt.vine_include_joe = cfg.bool_or("backtest", "vine_include_joe", true);
    s.master_seed = static_cast<std::uint64_t>(cfg.int_or("backtest", "master_seed", 42));
    s.n_seeds = static_cast<int>(cfg.int_or("backtest", "seeds", 1));
    if (s.bt.fit_window < 20) fail("[backtest] fit_window too small (need >= 20)");
    if (s.bt.blend_window < 2) fail("[backtest] blend_window must be >= 2");
    if (s.bt.c < 0.0) fail("[backtest] c must be nonnegative");
    if (s.bt.m <= 0.0) fail("[backtest] m must be positive");
    if (s.bt.n_scenarios < 100) fail("[backtest] n_scenarios must be >= 100");
    if (s.n_seeds < 1) fail("[backtest] seeds must be >= 1");
    if (cfg.has("backtest", "marginal_families")) {
        for (const auto& name : cfg.str_list("backtest", "marginal_families")) {
            try {
                s.bt.parametric_families.push_back(marginal_family_from_name(name));
            } catch (const std::exception& e) {
                fail(e.what());
            }
        }
    }

    // [arms]
    if (cfg.has("arms", "genmodels") && cfg.has("arms", "objectives")) {
        std::vector<double> tcavs = cfg.has("arms", "tcavs")
                                        ? cfg.num_list("arms", "tcavs")
                                        : std::vector<double>{1.0};
        for (const auto& g : cfg.str_list("arms", "genmodels")) {
            try {
                parse_genmodel(g);
            } catch (const std::exception& e) {
                fail(e.what());
                continue;
            }
            for (const auto& o : cfg.str_list("arms", "objectives")) {
                ObjectiveKind kind;
                try {
                    kind = objective_from_label(o);
                } catch (const std::exception& e) {
                    fail(e.what());
                    continue;
                }
                for (double v : tcavs) s.arms.push_back(ArmSpec{g, kind, v});
            }
        }
    } else {
        fail("[arms] genmodels and objectives are required");
    }

    // [bandit]
    if (cfg.has("bandit", "similarities")) {
        try {
            const int window =
                static_cast<int>(cfg.int_or("bandit", "window", s.bt.blend_window));
            std::vector<double> decays = cfg.has("bandit", "decays")
                                             ? cfg.num_list("bandit", "decays")
                                             : std::vector<double>{0.999};
            for (double g : decays)
                if (!(g > 0.0 && g < 1.0)) fail("[bandit] decay must lie in (0,1)");
            if (!cfg.has("bandit", "activations")) fail("[bandit] activations are required");
            if (!cfg.has("bandit", "policies")) fail("[bandit] policies are required");
            if (cfg.has("bandit", "activations") && cfg.has("bandit", "policies"))
                for (const auto& simi : cfg.str_list("bandit", "similarities"))
                    for (const auto& act : cfg.str_list("bandit", "activations"))
                        for (double g : decays)
                            for (const auto& pol : cfg.str_list("bandit", "policies")) {
                                try {
                                    BanditConfig bc;
                                    bc.similarity = similarity_from_label(simi);
                                    bc.activation = activation_from_label(act);
                                    bc.gamma = g;
                                    bc.policy = policy_from_label(pol);
                                    bc.window = window;
                                    s.bandits.push_back(bc);
                                } catch (const std::exception& e) {
                                    fail(e.what());
                                }
                            }
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }

    // [attribution]
    s.cv_folds = static_cast<int>(cfg.int_or("attribution", "folds", 7));
    s.grid_points = static_cast<int>(cfg.int_or("attribution", "grid_points", 100));
    s.grid_min_ratio = cfg.num_or("attribution", "grid_min_ratio", 1e-4);
    if (s.cv_folds < 2) fail("[attribution] folds must be >= 2");
    if (s.grid_points < 1) fail("[attribution] grid_points must be >= 1");

    // [fetch]
    s.fetch.endpoint = cfg.str_or("fetch", "endpoint", "");
    s.fetch.interval = cfg.str_or("fetch", "interval", "1d");
    s.fetch.rate_limit_ms = static_cast<int>(cfg.int_or("fetch", "rate_limit_ms", 0));
    if (cfg.has("fetch", "symbols")) s.fetch_symbols = cfg.str_list("fetch", "symbols");
    if (cfg.has("fetch", "start")) s.fetch.start = parse_rfc3339(cfg.str("fetch", "start"));
    if (cfg.has("fetch", "end")) s.fetch.end = parse_rfc3339(cfg.str("fetch", "end"));

    return s;
}

std::vector<std::uint64_t> path_seeds(const PipelineSettings& s) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < s.n_seeds; ++i)
        seeds.push_back(substream(s.master_seed, static_cast<std::uint64_t>(i)));
    return seeds;
}

ReturnPanel load_panel(const PipelineSettings& s) {
    PricePanel prices = s.synthetic
                            ? make_synthetic_panel(s.synthetic_steps, s.synthetic_assets,
                                                   s.synthetic_correlation, s.synthetic_vol,
                                                   s.synthetic_seed)
                            : load_price_csv(s.csv_path);
    return compute_returns(prices, s.step_days);
}

std::string write_manifest(const PipelineSettings& s, const std::string& out_dir,
                           const std::string& command, const std::vector<std::string>& files,
                           std::int64_t started, std::int64_t finished) {
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& f : files)
        outputs.push_back({{"path", fs::path(f).filename().string()}, {"fnv64", file_fnv(f)}});
    nlohmann::json j{{"config_hash", s.config_hash},
                     {"command", command},
                     {"tool_version", "genport 0.1.0"},
                     {"master_seed", s.master_seed},
                     {"n_seeds", s.n_seeds},
                     {"started", format_rfc3339(started)},
                     {"finished", format_rfc3339(finished)},
                     {"outputs", outputs}};
    const std::string path = (fs::path(out_dir) / ("manifest_" + command + ".json")).string();
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    return path;
}

RunArtifacts run_backtest_cmd(const PipelineSettings& s, const std::string& out_dir) {
    const auto started = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    fs::create_directories(out_dir);
    const ReturnPanel panel = load_panel(s);
    const auto seeds = path_seeds(s);

    const auto paths = run_fixed_backtest(s.bt, panel, s.arms, seeds);

    RunArtifacts art;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& p = paths[i];
        const std::string name = "fixed_" + slug(p.arm.id()) + "_seed" +
                                 std::to_string(i % seeds.size()) + ".csv";
        const std::string file = (fs::path(out_dir) / name).string();
        write_fixed_csv(file, p, panel.assets);
        art.files.push_back(file);
    }

    // benchmark series aligned with the arms
    {
        const auto bench = benchmark_path(panel, s.bt.fit_window);
        FixedPath bp;
        bp.arm = ArmSpec{"benchmark", {ObjectiveTag::LongParity, 0.0}, 0.0};
        bp.seed = 0;
        bp.records = bench;
        const std::string file = (fs::path(out_dir) / "benchmark.csv").string();
        write_fixed_csv(file, bp, panel.assets);
        art.files.push_back(file);
    }

    const auto finished = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    art.files.push_back(write_manifest(s, out_dir, "backtest", art.files, started, finished));
    return art;
}

RunArtifacts run_blend_cmd(const PipelineSettings& s, const std::string& out_dir) {
    const auto started = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    fs::create_directories(out_dir);
    if (s.bandits.empty()) throw std::runtime_error("no [bandit] grid configured");
    const ReturnPanel panel = load_panel(s);
    const auto seeds = path_seeds(s);

    // arms are recomputed here so blend does not depend on backtest output files
    const auto fixed = run_fixed_backtest(s.bt, panel, s.arms, seeds);
    auto cfg = s.bt;
    const auto paths = run_eclectic_backtest(cfg, panel, fixed, s.bandits);

    RunArtifacts art;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& p = paths[i];
        const std::string name = "eclectic_" + slug(p.bandit.id()) + "_seed" +
                                 std::to_string(i % seeds.size()) + ".csv";
        const std::string file = (fs::path(out_dir) / name).string();
        write_eclectic_csv(file, p, panel.assets);
        art.files.push_back(file);
    }
    const auto finished = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    art.files.push_back(write_manifest(s, out_dir, "blend", art.files, started, finished));
    return art;
}

std::vector<AttributionRecord> read_fixed_records(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot read " + csv_path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<AttributionRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() < 9) continue;
        AttributionRecord r;
        r.genmodel = cells[1];
        r.objective = cells[2];
        r.tcav = cells[3];
        r.simple_return = std::stod(cells[5]);
        r.logit_cosine = std::stod(cells[6]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<AttributionRecord> read_eclectic_records(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot read " + csv_path);
    std::string line;
    std::getline(in, line);
    std::vector<AttributionRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() < 10) continue;
        AttributionRecord r;
        r.simimtd = cells[1];
        r.actfun = cells[2];
        r.decay = cells[3];
        r.bldmtd = cells[4];
        r.simple_return = std::stod(cells[6]);
        r.logit_cosine = std::stod(cells[7]);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::vector<std::string> list_files(const std::string& out_dir, const std::string& prefix) {
    std::vector<std::string> files;
    if (!fs::exists(out_dir)) return files;
    for (const auto& e : fs::directory_iterator(out_dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".csv")
            files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

RunArtifacts run_attribute_cmd(const PipelineSettings& s, const std::string& out_dir,
                               AttributionScheme scheme, AttributionMeasure measure) {
    const auto started = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    const std::string prefix = scheme == AttributionScheme::FixedArm ? "fixed_" : "eclectic_";
    std::vector<AttributionRecord> records;
    for (const auto& f : list_files(out_dir, prefix)) {
        const auto part = scheme == AttributionScheme::FixedArm ? read_fixed_records(f)
                                                                : read_eclectic_records(f);
        records.insert(records.end(), part.begin(), part.end());
    }
    if (records.empty())
        throw std::runtime_error("no " + prefix + "*.csv results found in " + out_dir);

    const AttributionDataset ds = build_design_matrix(records, scheme, measure);
    const double lmax = lasso_lambda_max(ds.x, ds.y, &ds.penalized);
    const auto grid = default_lambda_grid(lmax, s.grid_points, s.grid_min_ratio);
    const LassoFit fit = lasso_cv(ds.x, ds.y, s.cv_folds, grid, &ds.penalized, s.master_seed);

    const std::string name = std::string("coefficients_") +
                             (scheme == AttributionScheme::FixedArm ? "fixed" : "eclectic") +
                             (measure == AttributionMeasure::SimpleReturn ? "_rp" : "_logitcos") +
                             ".csv";
    const std::string file = (fs::path(out_dir) / name).string();
    write_coefficient_csv(file, ds.column_labels, fit.beta);

    RunArtifacts art;
    art.files.push_back(file);
    const auto finished = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    art.files.push_back(write_manifest(s, out_dir, "attribute", art.files, started, finished));
    return art;
}

namespace {

struct SeriesRow {
    std::string timestamp;
    std::map<std::string, std::string> labels;
    double r_p = 0.0, logit_cosine = 0.0, wealth = 1.0;
    std::vector<double> psi;
    std::vector<double> w0;
};

std::vector<SeriesRow> read_series(const std::string& path, bool eclectic) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    const auto header = split_line(line);
    std::vector<SeriesRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        SeriesRow r;
        r.timestamp = cells[0];
        std::size_t base;
        if (eclectic) {
            r.labels["SimiMtd"] = cells[1];
            r.labels["ActFun"] = cells[2];
            r.labels["Decay"] = cells[3];
            r.labels["BldMtd"] = cells[4];
            r.labels["seed"] = cells[5];
            base = 6;
        } else {
            r.labels["GenMdl"] = cells[1];
            r.labels["ObjFun"] = cells[2];
            r.labels["TCAvs"] = cells[3];
            r.labels["seed"] = cells[4];
            base = 5;
        }
        r.r_p = std::stod(cells[base]);
        r.logit_cosine = std::stod(cells[base + 1]);
        r.wealth = std::stod(cells[base + 3]);
        for (std::size_t i = base + 4; i < cells.size(); ++i) {
            if (header[i].rfind("psi_", 0) == 0) r.psi.push_back(std::stod(cells[i]));
            else r.w0.push_back(std::stod(cells[i]));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

RunArtifacts run_report_cmd(const PipelineSettings& s, const std::string& out_dir) {
    const auto started = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    RunArtifacts art;

    for (const bool eclectic : {false, true}) {
        const std::string prefix = eclectic ? "eclectic_" : "fixed_";
        const auto files = list_files(out_dir, prefix);
        if (files.empty()) continue;

        // cumulative wealth per path, long format; the benchmark rides along
        // with the fixed arms for side-by-side plots
        const std::string kind = eclectic ? "eclectic" : "fixed";
        {
            std::ofstream out(fs::path(out_dir) / ("report_cumret_" + kind + ".csv"));
            out << "timestamp,path,wealth\n";
            auto emit = [&](const std::string& f) {
                const auto rows = read_series(f, eclectic);
                const std::string pathname = fs::path(f).stem().string();
                for (const auto& r : rows)
                    out << r.timestamp << ',' << pathname << ',' << r.wealth << '\n';
            };
            for (const auto& f : files) emit(f);
            const std::string bench = (fs::path(out_dir) / "benchmark.csv").string();
            if (!eclectic && fs::exists(bench)) emit(bench);
            art.files.push_back((fs::path(out_dir) / ("report_cumret_" + kind + ".csv")).string());
        }

        // cumulative sum of the logit-cosine measure, averaged by factor level
        {
            const std::vector<std::string> factors =
                eclectic ? std::vector<std::string>{"SimiMtd", "ActFun", "Decay", "BldMtd"}
                         : std::vector<std::string>{"GenMdl", "ObjFun", "TCAvs"};
            // factor -> level -> timestamp -> (sum, count)
            std::map<std::string, std::map<std::string, std::map<std::string, std::pair<double, int>>>> acc;
            for (const auto& f : files) {
                const auto rows = read_series(f, eclectic);
                std::map<std::string, double> cum;  // per factor-level running sums collapse below
                double running = 0.0;
                for (const auto& r : rows) {
                    running += r.logit_cosine;
                    for (const auto& fac : factors) {
                        auto& cell = acc[fac][r.labels.at(fac)][r.timestamp];
                        cell.first += running;
                        cell.second += 1;
                    }
                }
            }
            std::ofstream out(fs::path(out_dir) / ("report_group_logitcos_" + kind + ".csv"));
            out << "factor,level,timestamp,mean_cumsum_logit_cosine\n";
            for (const auto& [fac, levels] : acc)
                for (const auto& [level, series] : levels)
                    for (const auto& [ts, cell] : series)
                        out << fac << ',' << level << ',' << ts << ','
                            << cell.first / cell.second << '\n';
            art.files.push_back(
                (fs::path(out_dir) / ("report_group_logitcos_" + kind + ".csv")).string());
        }

        // averaged weights (and psi trajectories for eclectic paths)
        {
            std::map<std::string, std::pair<std::vector<double>, int>> wsum;  // ts -> sums
            std::map<std::string, std::pair<std::vector<double>, int>> psisum;
            for (const auto& f : files) {
                const auto rows = read_series(f, eclectic);
                for (const auto& r : rows) {
                    auto& cell = wsum[r.timestamp];
                    if (cell.first.empty()) cell.first.assign(r.w0.size(), 0.0);
                    for (std::size_t i = 0; i < r.w0.size(); ++i) cell.first[i] += r.w0[i];
                    cell.second += 1;
                    if (!r.psi.empty()) {
                        auto& pc = psisum[r.timestamp];
                        if (pc.first.empty()) pc.first.assign(r.psi.size(), 0.0);
                        for (std::size_t i = 0; i < r.psi.size(); ++i) pc.first[i] += r.psi[i];
                        pc.second += 1;
                    }
                }
            }
            std::ofstream out(fs::path(out_dir) / ("report_avg_weights_" + kind + ".csv"));
            out << "timestamp,asset_index,mean_w0\n";
            for (const auto& [ts, cell] : wsum)
                for (std::size_t i = 0; i < cell.first.size(); ++i)
                    out << ts << ',' << i << ',' << cell.first[i] / cell.second << '\n';
            art.files.push_back(
                (fs::path(out_dir) / ("report_avg_weights_" + kind + ".csv")).string());
            if (!psisum.empty()) {
                std::ofstream pout(fs::path(out_dir) / "report_psi_trajectories.csv");
                pout << "timestamp,arm_index,mean_psi\n";
                for (const auto& [ts, cell] : psisum)
                    for (std::size_t i = 0; i < cell.first.size(); ++i)
                        pout << ts << ',' << i << ',' << cell.first[i] / cell.second << '\n';
                art.files.push_back((fs::path(out_dir) / "report_psi_trajectories.csv").string());
            }
        }
    }

    if (art.files.empty())
        throw std::runtime_error("no backtest or blend results found in " + out_dir);
    const auto finished = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    art.files.push_back(write_manifest(s, out_dir, "report", art.files, started, finished));
    return art;
}

RunArtifacts run_fetch_cmd(const PipelineSettings& s, const std::string& out_dir) {
    const auto started = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    if (s.fetch.endpoint.empty() || s.fetch_symbols.empty())
        throw std::runtime_error("[fetch] endpoint and symbols are required");
    fs::create_directories(out_dir);
    const PricePanel panel = fetch_candles(s.fetch, s.fetch_symbols);
    const std::string file = (fs::path(out_dir) / "prices.csv").string();
    save_price_csv(panel, file);
    RunArtifacts art;
    art.files.push_back(file);
    const auto finished = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    art.files.push_back(write_manifest(s, out_dir, "fetch", art.files, started, finished));
    return art;
}

}  // namespace genport
