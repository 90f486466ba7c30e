#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Close prices on a strictly increasing UTC time grid. Rows with any
// non-finite or non-positive cell are dropped at load time.
struct PricePanel {
    std::vector<std::int64_t> timestamps;  // epoch seconds
    std::vector<std::string> assets;
    Mat prices;  // T x D, all > 0
    int dropped_rows = 0;

    Eigen::Index steps() const { return prices.rows(); }
    Eigen::Index n_assets() const { return prices.cols(); }
};

// Simple returns over non-overlapping step-length intervals.
struct ReturnPanel {
    std::vector<std::int64_t> timestamps;  // end of each interval
    std::vector<std::string> assets;
    Mat returns;  // rows x D, every entry > -1
    int step_days = 1;

    Eigen::Index steps() const { return returns.rows(); }
    Eigen::Index n_assets() const { return returns.cols(); }
};

std::int64_t parse_rfc3339(const std::string& s);
std::string format_rfc3339(std::int64_t epoch_seconds);

// Header must be `timestamp,<sym1>,...,<symD>`. Rows are sorted by
// timestamp; duplicate timestamps are an error; unusable rows are dropped
// and counted.
PricePanel load_price_csv(const std::string& path);
void save_price_csv(const PricePanel& panel, const std::string& path);

ReturnPanel compute_returns(const PricePanel& panel, int step);

// Geometric random walk with a planted cross-asset correlation; stands in
// for exchange data in demos and tests.
PricePanel make_synthetic_panel(int steps, int n_assets, double correlation,
                                double daily_vol, std::uint64_t seed);

// Candle retrieval over an exchange-style HTTP endpoint returning a JSON
// array of [open_time, open, high, low, close, ...] rows.
struct FetchConfig {
    std::string endpoint;    // e.g. http://host:port/klines
    std::string interval = "1d";
    std::int64_t start = 0;  // epoch seconds, inclusive
    std::int64_t end = 0;    // epoch seconds, exclusive
    int rate_limit_ms = 0;
    int max_retries = 3;
    int page_limit = 1000;
};

PricePanel fetch_candles(const FetchConfig& cfg, const std::vector<std::string>& symbols);

}  // namespace genport
