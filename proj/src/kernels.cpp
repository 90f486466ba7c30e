#include "genport/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace genport {

Vec portfolio_returns_serial(const Mat& scenarios, const Vec& w, double cost) {
    const Eigen::Index n = scenarios.rows(), d = scenarios.cols();
    Vec out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) acc += scenarios(i, j) * w[j];
        out[i] = acc - cost;
    }
    return out;
}

Vec portfolio_returns(const Mat& scenarios, const Vec& w, double cost) {
    const Eigen::Index n = scenarios.rows(), d = scenarios.cols();
    Vec out(n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) acc += scenarios(i, j) * w[j];
        out[i] = acc - cost;
    }
    return out;
}

namespace {

// counts pairs (i < j) with v[i] > v[j]
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf) {
    const std::size_t n = v.size();
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width, hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    swaps += mid - i;
                    buf[k++] = v[j++];
                } else {
                    buf[k++] = v[i++];
                }
            }
            while (i < mid) buf[k++] = v[i++];
            while (j < hi) buf[k++] = v[j++];
            std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
        }
    }
    return swaps;
}

std::uint64_t tie_pairs(const std::vector<double>& sorted) {
    std::uint64_t total = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

}  // namespace

double kendall_tau(const Vec& x, const Vec& y, bool* degenerate) {
    const std::size_t n = static_cast<std::size_t>(x.size());
    if (degenerate) *degenerate = false;
    if (n < 2 || y.size() != x.size()) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::uint64_t n1 = 0, n3 = 0;
    {
        std::size_t run_x = 1, run_xy = 1;
        for (std::size_t i = 1; i <= n; ++i) {
            const bool same_x = i < n && x[idx[i]] == x[idx[i - 1]];
            const bool same_xy = same_x && y[idx[i]] == y[idx[i - 1]];
            if (same_x) ++run_x; else { n1 += (std::uint64_t)run_x * (run_x - 1) / 2; run_x = 1; }
            if (same_xy) ++run_xy; else { n3 += (std::uint64_t)run_xy * (run_xy - 1) / 2; run_xy = 1; }
        }
    }

    std::vector<double> ys(n), buf(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
    const std::uint64_t swaps = merge_count(ys, buf);
    const std::uint64_t n2 = tie_pairs(ys);  // ys is sorted after merge_count

    const double denom = std::sqrt(static_cast<double>(n0 - n1)) *
                         std::sqrt(static_cast<double>(n0 - n2));
    if (denom == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    const double num = static_cast<double>(n0 - n1 - n2 + n3) - 2.0 * static_cast<double>(swaps);
    return num / denom;
}

Mat kendall_tau_matrix_serial(const Mat& cols) {
    const Eigen::Index d = cols.cols();
    Mat tau = Mat::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const double t = kendall_tau(cols.col(i), cols.col(j));
            tau(i, j) = t;
            tau(j, i) = t;
        }
    return tau;
}

Mat kendall_tau_matrix(const Mat& cols) {
    const Eigen::Index d = cols.cols();
    Mat tau = Mat::Identity(d, d);
    const Eigen::Index npairs = d * (d - 1) / 2;
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index k = 0; k < npairs; ++k) {
        // unrank pair index
        Eigen::Index i = 0, rem = k;
        while (rem >= d - 1 - i) { rem -= d - 1 - i; ++i; }
        const Eigen::Index j = i + 1 + rem;
        const double t = kendall_tau(cols.col(i), cols.col(j));
        tau(i, j) = t;
        tau(j, i) = t;
    }
    return tau;
}

Mat pseudo_observations(const Mat& sample) {
    const Eigen::Index n = sample.rows(), d = sample.cols();
    Mat u(n, d);
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < d; ++c) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return sample(a, c) < sample(b, c);
        });
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i;
            while (j + 1 < idx.size() && sample(idx[j + 1], c) == sample(idx[i], c)) ++j;
            const double avg_rank = 0.5 * (i + j) + 1.0;  // 1-based average rank
            for (std::size_t k = i; k <= j; ++k)
                u(idx[k], c) = avg_rank / (n + 1.0);
            i = j + 1;
        }
    }
    return u;
}

}  // namespace genport
