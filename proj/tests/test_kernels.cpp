#include <doctest.h>

#include <cmath>

#include "genport/kernels.hpp"
#include "genport/rng.hpp"

using namespace genport;

TEST_SUITE_BEGIN("kernels");

namespace {

// O(n^2) reference for tau-b
double tau_brute(const Vec& x, const Vec& y) {
    const Eigen::Index n = x.size();
    long long num = 0, tx = 0, ty = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double sx = x[i] == x[j] ? 0.0 : (x[i] < x[j] ? 1.0 : -1.0);
            const double sy = y[i] == y[j] ? 0.0 : (y[i] < y[j] ? 1.0 : -1.0);
            num += static_cast<long long>(sx * sy);
            if (x[i] == x[j]) ++tx;
            if (y[i] == y[j]) ++ty;
        }
    const double n0 = static_cast<double>(n) * (n - 1) / 2.0;
    return num / std::sqrt((n0 - tx) * (n0 - ty));
}

}  // namespace

TEST_CASE("kendall tau perfect concordance and discordance") {
    Vec x(3), y(3), z(3);
    x << 1, 2, 3;
    y << 1, 2, 3;
    z << 3, 2, 1;
    CHECK(kendall_tau(x, y) == doctest::Approx(1.0));
    CHECK(kendall_tau(x, z) == doctest::Approx(-1.0));
}

TEST_CASE("kendall tau flags constant input") {
    Vec x = Vec::Constant(10, 2.0), y(10);
    for (int i = 0; i < 10; ++i) y[i] = i;
    bool degenerate = false;
    CHECK(kendall_tau(x, y, &degenerate) == 0.0);
    CHECK(degenerate);
}

TEST_CASE("kendall tau matches the quadratic reference, with ties") {
    RngStream rs(substream(3, RngPurpose::Test));
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 200;
        Vec x(n), y(n);
        for (int i = 0; i < n; ++i) {
            // discretize to force ties
            x[i] = std::floor(rs.normal() * 3.0);
            y[i] = std::floor((0.5 * x[i] + rs.normal()) * 2.0);
        }
        CHECK(kendall_tau(x, y) == doctest::Approx(tau_brute(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("portfolio returns serial and omp agree bitwise") {
    const int n = 5000, d = 7;
    Mat r(n, d);
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(9, RngPurpose::Test, static_cast<std::uint64_t>(i)));
        for (int j = 0; j < d; ++j) r(i, j) = 0.05 * rs.normal();
    }
    Vec w(d);
    for (int j = 0; j < d; ++j) w[j] = (j % 2 ? -1.0 : 1.0) / d;
    const Vec a = portfolio_returns_serial(r, w, 0.002);
    const Vec b = portfolio_returns(r, w, 0.002);
    CHECK((a.array() == b.array()).all());
}

TEST_CASE("tau matrix serial and omp agree bitwise") {
    const int n = 500, d = 6;
    Mat u(n, d);
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(10, RngPurpose::Test, static_cast<std::uint64_t>(i)));
        const double common = rs.normal();
        for (int j = 0; j < d; ++j) u(i, j) = 0.5 * common + rs.normal();
    }
    const Mat a = kendall_tau_matrix_serial(u);
    const Mat b = kendall_tau_matrix(u);
    CHECK((a.array() == b.array()).all());
    for (int i = 0; i < d; ++i) CHECK(a(i, i) == 1.0);
}

TEST_CASE("pseudo observations use average ranks over n+1") {
    Mat x(3, 1);
    x << 10, 20, 15;
    const Mat u = pseudo_observations(x);
    CHECK(u(0, 0) == doctest::Approx(0.25));
    CHECK(u(2, 0) == doctest::Approx(0.5));
    CHECK(u(1, 0) == doctest::Approx(0.75));

    Mat two(2, 1);
    two << 10, 20;
    const Mat u2 = pseudo_observations(two);
    CHECK(u2(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(u2(1, 0) == doctest::Approx(2.0 / 3.0));

    Mat tied(2, 1);
    tied << 5, 5;
    const Mat u3 = pseudo_observations(tied);
    CHECK(u3(0, 0) == doctest::Approx(0.5));
    CHECK(u3(1, 0) == doctest::Approx(0.5));
}

TEST_SUITE_END();
