#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "genport/copula.hpp"
#include "genport/kernels.hpp"
#include "genport/rng.hpp"
#include "genport/rvine.hpp"

using namespace genport;

TEST_SUITE_BEGIN("rvine");

namespace {

// exchangeable gaussian dependence through a one-factor model
Mat factor_uniforms(int n, int d, double loading, std::uint64_t seed) {
    Mat u(n, d);
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(seed, RngPurpose::Test, static_cast<std::uint64_t>(i)));
        const double f = rs.normal();
        for (int j = 0; j < d; ++j)
            u(i, j) = normal_cdf(loading * f + std::sqrt(1.0 - loading * loading) * rs.normal());
    }
    return u;
}

Mat independent_uniforms(int n, int d, std::uint64_t seed) {
    Mat u(n, d);
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(seed, RngPurpose::Test, static_cast<std::uint64_t>(i)));
        for (int j = 0; j < d; ++j) u(i, j) = rs.uniform();
    }
    return u;
}

}  // namespace

TEST_CASE("d = 2 vine equals a single pair copula fit") {
    const Mat u = factor_uniforms(2000, 2, 0.7, 1);
    const RvineModel vine = fit_rvine(u, BicopFamilySet::elliptical());
    REQUIRE(vine.trees.size() == 1);
    REQUIRE(vine.trees[0].size() == 1);
    const BicopModel direct = fit_bicop(u, BicopFamilySet::elliptical());
    CHECK(vine.trees[0][0].pc.family == direct.family);
    CHECK(vine.trees[0][0].pc.params[0] == doctest::Approx(direct.params[0]).epsilon(1e-9));
}

TEST_CASE("tree 1 is the max spanning tree (brute force oracle at d = 3)") {
    const Mat u = factor_uniforms(3000, 3, 0.75, 2);
    const Mat tau = kendall_tau_matrix_serial(u);
    // all three spanning trees on 3 nodes: {01,02}, {01,12}, {02,12}
    const double s01_02 = std::fabs(tau(0, 1)) + std::fabs(tau(0, 2));
    const double s01_12 = std::fabs(tau(0, 1)) + std::fabs(tau(1, 2));
    const double s02_12 = std::fabs(tau(0, 2)) + std::fabs(tau(1, 2));
    const double best = std::max({s01_02, s01_12, s02_12});

    const RvineModel vine = fit_rvine(u, BicopFamilySet::elliptical());
    double got = 0.0;
    for (const auto& e : vine.trees[0]) got += std::fabs(e.tau);
    CHECK(got == doctest::Approx(best).epsilon(0.03));
    CHECK(rvine_structure_valid(vine));
}

TEST_CASE("independent data selects independence pair copulas") {
    int all_indep = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Mat u = independent_uniforms(1500, 3, 100 + seed);
        const RvineModel vine = fit_rvine(u, BicopFamilySet::allfam());
        bool indep = true;
        for (const auto& tree : vine.trees)
            for (const auto& e : tree)
                indep = indep && e.pc.family == BicopFamily::Independence;
        if (indep) ++all_indep;
    }
    CHECK(all_indep >= 8);
}

TEST_CASE("rosenblatt recovers the driving uniforms (d <= 6)") {
    // the contract is d <= 4; 5 and 6 exercise the structure peeling harder
    for (int d : {2, 3, 4, 5, 6}) {
        const Mat u = factor_uniforms(1200, d, 0.7, 7 + d);
        const RvineModel vine = fit_rvine(u, BicopFamilySet::allfam());
        REQUIRE(rvine_structure_valid(vine));

        const int n = 1000;
        const Mat sample = sample_rvine(vine, n, 99);
        const Mat w = rvine_rosenblatt(vine, sample);
        // regenerate the driving uniforms the sampler consumed
        for (int i = 0; i < n; ++i) {
            RngStream rs(substream(99ULL, RngPurpose::Scenario, static_cast<std::uint64_t>(i)));
            for (int k = 0; k < d; ++k) {
                const double expected = rs.uniform();
                INFO("d ", d, " row ", i, " col ", k);
                CHECK(std::fabs(w(i, k) - expected) < 1e-9);
            }
        }
    }
}

TEST_CASE("refit on own sample reproduces pairwise tau") {
    const int d = 4, n = 100000;
    const Mat u = factor_uniforms(4000, d, 0.75, 11);
    const RvineModel vine = fit_rvine(u, BicopFamilySet::elliptical());

    const Mat sample = sample_rvine(vine, n, 5);
    const Mat tau_sample = kendall_tau_matrix(sample);

    const RvineModel refit = fit_rvine(sample, BicopFamilySet::elliptical());
    const Mat resample = sample_rvine(refit, n, 6);
    const Mat tau_resample = kendall_tau_matrix(resample);

    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            CHECK(std::fabs(tau_sample(i, j) - tau_resample(i, j)) < 0.02);
}

TEST_CASE("all-independence vine emits independent columns") {
    RvineModel vine;
    vine.d = 3;
    // star 0-1, 0-2, then edge {1,2|0}; all pair copulas independence
    RvineEdge e01, e02, e12;
    e01.var_a = 0; e01.var_b = 1; e01.constraint = {0, 1};
    e01.child_a = 0; e01.child_b = 1;
    e02.var_a = 0; e02.var_b = 2; e02.constraint = {0, 2};
    e02.child_a = 0; e02.child_b = 2;
    vine.trees.push_back({e01, e02});
    e12.var_a = 1; e12.var_b = 2; e12.cond = {0}; e12.constraint = {0, 1, 2};
    e12.child_a = 0; e12.child_b = 1;
    e12.child_a_is_a = false;  // F(1 | 0) is the b-side output of edge {0,1}
    e12.child_b_is_a = false;  // F(2 | 0) is the b-side output of edge {0,2}
    vine.trees.push_back({e12});
    const RvineModel loaded = rvine_from_json(rvine_to_json(vine));
    CHECK(rvine_structure_valid(loaded));

    const Mat s = sample_rvine(loaded, 100000, 21);
    const Mat tau = kendall_tau_matrix(s);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) CHECK(std::fabs(tau(i, j)) < 0.01);
}

TEST_CASE("vine json round trip preserves sampling behaviour") {
    const Mat u = factor_uniforms(1500, 3, 0.6, 31);
    const RvineModel vine = fit_rvine(u, BicopFamilySet::allfam());
    const RvineModel loaded = rvine_from_json(rvine_to_json(vine));
    const Mat a = sample_rvine(vine, 500, 77);
    const Mat b = sample_rvine(loaded, 500, 77);
    CHECK((a.array() == b.array()).all());
}

TEST_SUITE_END();
