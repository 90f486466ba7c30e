#include <chrono>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "genport/data.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace genport {

namespace {

// single-flight per symbol: concurrent fetches of the same symbol serialize
std::mutex g_flight_mutex;
std::map<std::string, std::shared_ptr<std::mutex>> g_symbol_locks;

std::shared_ptr<std::mutex> symbol_lock(const std::string& symbol) {
    std::lock_guard<std::mutex> g(g_flight_mutex);
    auto& m = g_symbol_locks[symbol];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

struct SplitUrl {
    std::string host;  // scheme://host:port
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::runtime_error("bad endpoint url: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<std::pair<std::int64_t, double>> fetch_symbol(const FetchConfig& cfg,
                                                          const std::string& symbol) {
    const SplitUrl u = split_url(cfg.endpoint);
    httplib::Client client(u.host);
    client.set_read_timeout(30, 0);

    std::vector<std::pair<std::int64_t, double>> closes;
    std::int64_t cursor = cfg.start;
    while (cfg.end == 0 || cursor < cfg.end) {
        httplib::Params params{{"symbol", symbol},
                               {"interval", cfg.interval},
                               {"start", std::to_string(cursor)},
                               {"limit", std::to_string(cfg.page_limit)}};
        if (cfg.end > 0) params.emplace("end", std::to_string(cfg.end));

        httplib::Result res;
        int attempt = 0;
        for (;;) {
            res = client.Get(u.path, params, httplib::Headers{});
            if (res && res->status == 429) {
                // rate-limit signal: sleep the configured interval and retry
                std::this_thread::sleep_for(std::chrono::milliseconds(
                    cfg.rate_limit_ms > 0 ? cfg.rate_limit_ms : 250));
                continue;
            }
            if (res && res->status == 200) break;
            if (++attempt > cfg.max_retries)
                throw std::runtime_error("fetch failed for " + symbol + " after " +
                                         std::to_string(cfg.max_retries) + " retries");
            std::this_thread::sleep_for(std::chrono::milliseconds(100 * (1 << attempt)));
        }

        const auto body = nlohmann::json::parse(res->body);
        if (!body.is_array()) throw std::runtime_error("unexpected candle payload for " + symbol);
        if (body.empty()) {
            if (closes.empty()) throw std::runtime_error("empty response for " + symbol);
            break;
        }
        for (const auto& row : body) {
            if (!row.is_array() || row.size() < 5)
                throw std::runtime_error("malformed candle row for " + symbol);
            std::int64_t open_time = row[0].get<std::int64_t>();
            if (open_time > 100000000000LL) open_time /= 1000;  // ms to s
            const double close = row[4].is_string()
                                     ? std::stod(row[4].get<std::string>())
                                     : row[4].get<double>();
            if (cfg.end > 0 && open_time >= cfg.end) continue;
            closes.emplace_back(open_time, close);
        }
        const std::int64_t last = closes.back().first;
        if (last < cursor) break;  // server did not advance; avoid spinning
        cursor = last + 1;
        if (static_cast<int>(body.size()) < cfg.page_limit) break;
        if (cfg.rate_limit_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg.rate_limit_ms));
    }
    if (closes.empty()) throw std::runtime_error("empty response for " + symbol);
    return closes;
}

}  // namespace

PricePanel fetch_candles(const FetchConfig& cfg, const std::vector<std::string>& symbols) {
    if (symbols.empty()) throw std::invalid_argument("no symbols to fetch");

    std::map<std::string, std::map<std::int64_t, double>> series;
    for (const auto& sym : symbols) {
        auto lock = symbol_lock(sym);
        std::lock_guard<std::mutex> g(*lock);
        for (const auto& [ts, close] : fetch_symbol(cfg, sym)) series[sym][ts] = close;
    }

    // intersect timestamps so the panel has no gaps
    std::map<std::int64_t, int> counts;
    for (const auto& [sym, m] : series)
        for (const auto& [ts, v] : m) counts[ts]++;
    std::vector<std::int64_t> grid;
    for (const auto& [ts, c] : counts)
        if (c == static_cast<int>(symbols.size())) grid.push_back(ts);
    if (grid.size() < 2) throw std::runtime_error("fewer than 2 complete candle rows fetched");

    PricePanel panel;
    panel.assets = symbols;
    panel.timestamps = grid;
    panel.prices.resize(static_cast<Eigen::Index>(grid.size()),
                        static_cast<Eigen::Index>(symbols.size()));
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < symbols.size(); ++j)
            panel.prices(i, j) = series[symbols[j]][grid[i]];
    return panel;
}

}  // namespace genport
