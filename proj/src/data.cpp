#include "genport/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "genport/rng.hpp"

namespace genport {

std::int64_t parse_rfc3339(const std::string& s) {
    std::tm tm{};
    int y, mo, d, h = 0, mi = 0;
    double sec = 0.0;
    int n = std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%lf", &y, &mo, &d, &h, &mi, &sec);
    if (n < 3) {
        // plain integer epoch is accepted too
        char* endp = nullptr;
        const long long v = std::strtoll(s.c_str(), &endp, 10);
        if (endp && *endp == '\0' && endp != s.c_str())
            return v > 100000000000LL ? v / 1000 : v;  // ms vs s heuristics
        throw std::runtime_error("unparseable timestamp: " + s);
    }
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = static_cast<int>(sec);
    return timegm(&tm);
}

std::string format_rfc3339(std::int64_t epoch_seconds) {
    std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

}  // namespace

PricePanel load_price_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open price csv: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty price csv: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "timestamp")
        throw std::runtime_error("malformed header, expected `timestamp,<symbols...>`: " + path);

    PricePanel panel;
    panel.assets.assign(header.begin() + 1, header.end());
    const std::size_t d = panel.assets.size();

    std::vector<std::pair<std::int64_t, std::vector<double>>> rows;
    int dropped = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != d + 1) { ++dropped; continue; }
        std::int64_t ts;
        try {
            ts = parse_rfc3339(cells[0]);
        } catch (const std::exception&) {
            ++dropped;
            continue;
        }
        std::vector<double> vals(d);
        bool ok = true;
        for (std::size_t j = 0; j < d; ++j) {
            char* endp = nullptr;
            vals[j] = std::strtod(cells[j + 1].c_str(), &endp);
            if (endp == cells[j + 1].c_str() || !std::isfinite(vals[j]) || vals[j] <= 0.0)
                ok = false;
        }
        if (!ok) { ++dropped; continue; }
        rows.emplace_back(ts, std::move(vals));
    }
    if (rows.size() < 2)
        throw std::runtime_error("fewer than 2 usable rows in " + path);

    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first == rows[i - 1].first)
            throw std::runtime_error("duplicate timestamp in " + path + ": " +
                                     format_rfc3339(rows[i].first));

    panel.timestamps.reserve(rows.size());
    panel.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        panel.timestamps.push_back(rows[i].first);
        for (std::size_t j = 0; j < d; ++j) panel.prices(i, j) = rows[i].second[j];
    }
    panel.dropped_rows = dropped;
    if (dropped > 0)
        std::fprintf(stderr, "warning: dropped %d unusable rows while loading %s\n", dropped,
                     path.c_str());
    return panel;
}

void save_price_csv(const PricePanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "timestamp";
    for (const auto& a : panel.assets) out << ',' << a;
    out << '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < panel.steps(); ++i) {
        out << format_rfc3339(panel.timestamps[i]);
        for (Eigen::Index j = 0; j < panel.n_assets(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", panel.prices(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

ReturnPanel compute_returns(const PricePanel& panel, int step) {
    if (step < 1) throw std::invalid_argument("step must be positive");
    const Eigen::Index t = panel.steps();
    if (t <= step) throw std::invalid_argument("step >= number of price rows");

    const Eigen::Index n = (t - 1) / step;
    ReturnPanel rp;
    rp.assets = panel.assets;
    rp.step_days = step;
    rp.returns.resize(n, panel.n_assets());
    rp.timestamps.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index a = i * step, b = (i + 1) * step;
        rp.timestamps.push_back(panel.timestamps[b]);
        for (Eigen::Index j = 0; j < panel.n_assets(); ++j)
            rp.returns(i, j) = panel.prices(b, j) / panel.prices(a, j) - 1.0;
    }
    return rp;
}

PricePanel make_synthetic_panel(int steps, int n_assets, double correlation,
                                double daily_vol, std::uint64_t seed) {
    if (steps < 2 || n_assets < 1) throw std::invalid_argument("bad synthetic panel shape");
    PricePanel panel;
    panel.assets.reserve(n_assets);
    for (int j = 0; j < n_assets; ++j) panel.assets.push_back("SYN" + std::to_string(j + 1));
    panel.prices.resize(steps, n_assets);
    panel.timestamps.reserve(steps);

    const std::int64_t t0 = parse_rfc3339("2021-01-01T00:00:00Z");
    const double rho = std::clamp(correlation, 0.0, 0.999);
    Vec level = Vec::Constant(n_assets, 100.0);
    for (int i = 0; i < steps; ++i) {
        panel.timestamps.push_back(t0 + 86400LL * i);
        if (i > 0) {
            RngStream rs(substream(seed, RngPurpose::Synthetic, static_cast<std::uint64_t>(i)));
            const double common = rs.normal();
            for (int j = 0; j < n_assets; ++j) {
                const double z = std::sqrt(rho) * common + std::sqrt(1.0 - rho) * rs.normal();
                level[j] *= std::exp(daily_vol * z - 0.5 * daily_vol * daily_vol);
            }
        }
        for (int j = 0; j < n_assets; ++j) panel.prices(i, j) = level[j];
    }
    return panel;
}

}  // namespace genport
