#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "genport/rng.hpp"
#include "genport/volatility.hpp"

using namespace genport;

TEST_SUITE_BEGIN("volatility");

TEST_CASE("unconditional variance closed form") {
    GarchModel m;
    m.alpha0 = 0.1;
    m.alpha1 = 0.1;
    m.beta1 = 0.8;
    CHECK(m.unconditional_variance() == doctest::Approx(1.0));
}

TEST_CASE("filter recursion arithmetic") {
    GarchModel m;
    m.mu = 0.0;
    m.alpha0 = 0.1;
    m.alpha1 = 0.1;
    m.beta1 = 0.8;
    // with h_{t-1} = 1 and a_{t-1} = 1 the next variance is exactly 1
    CHECK(m.alpha0 + m.alpha1 * 1.0 + m.beta1 * 1.0 == doctest::Approx(1.0));

    // degenerate alpha1 = beta1 = 0 pins h at alpha0 after the seed value
    GarchModel flat;
    flat.mu = 0.5;
    flat.alpha0 = 0.04;
    flat.alpha1 = 0.0;
    flat.beta1 = 0.0;
    Vec r(4);
    r << 0.7, 0.3, 0.6, 0.4;
    const GarchFilterResult f = garch_filter(flat, r);
    for (Eigen::Index t = 1; t < 4; ++t) {
        CHECK(f.h[t] == doctest::Approx(0.04));
        CHECK(f.z[t] == doctest::Approx((r[t] - 0.5) / 0.2));
    }
}

TEST_CASE("filter inverts simulation") {
    GarchModel m;
    m.mu = 0.001;
    m.alpha0 = 0.05;
    m.alpha1 = 0.1;
    m.beta1 = 0.85;
    const Vec path = simulate_garch11_path(m, 3000, 11);
    const GarchFilterResult f = garch_filter(m, path);
    // standardized residuals should have unit sample variance
    const double var = f.z.squaredNorm() / f.z.size();
    CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("garch refit recovers simulated parameters") {
    GarchModel truth;
    truth.mu = 0.0;
    truth.alpha0 = 0.05;
    truth.alpha1 = 0.10;
    truth.beta1 = 0.85;
    const Vec path = simulate_garch11_path(truth, 5000, 21);
    const GarchModel fit = fit_garch11(path);
    CHECK(std::fabs(fit.alpha0 - truth.alpha0) < 0.05);
    CHECK(std::fabs(fit.alpha1 - truth.alpha1) < 0.05);
    CHECK(std::fabs(fit.beta1 - truth.beta1) < 0.05);
    CHECK(fit.alpha1 + fit.beta1 < 1.0);
}

TEST_CASE("iid gaussian data yields a small arch coefficient") {
    RngStream rs(substream(31, RngPurpose::Test));
    Vec r(3000);
    for (int i = 0; i < 3000; ++i) r[i] = 0.01 * rs.normal();
    const GarchModel fit = fit_garch11(r);
    CHECK(fit.alpha1 < 0.05);
}

TEST_CASE("dcc degenerate cases") {
    // constant-correlation data drives (a,b) to the no-dynamics corner
    RngStream rs(substream(41, RngPurpose::Test));
    const int t_len = 1500;
    Mat eps(t_len, 2);
    for (int t = 0; t < t_len; ++t) {
        const double z = rs.normal();
        eps(t, 0) = z;
        eps(t, 1) = 0.6 * z + 0.8 * rs.normal();
    }
    const DccModel m = fit_dcc11(eps);
    const auto rs_path = dcc_correlation_path(m, eps);
    if (m.a == 0.0 && m.b == 0.0) {
        for (std::size_t t = 1; t < rs_path.size(); ++t)
            CHECK((rs_path[t].array() == rs_path[0].array()).all());
    }
    // either way the filtered correlations stay near the planted 0.6
    double acc = 0.0;
    for (const auto& rm : rs_path) acc += rm(0, 1);
    CHECK(acc / rs_path.size() == doctest::Approx(0.6).epsilon(0.1));

    // D = 1 panel: correlation is identically [1]
    Mat one(200, 1);
    for (int t = 0; t < 200; ++t) one(t, 0) = rs.normal();
    const DccModel m1 = fit_dcc11(one);
    CHECK(m1.a == 0.0);
    CHECK(m1.b == 0.0);
    CHECK(dcc_correlation_path(m1, one)[0](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("dcc refit recovers simulated dynamics") {
    Mat qbar(3, 3);
    qbar << 1.0, 0.5, 0.3,
            0.5, 1.0, 0.4,
            0.3, 0.4, 1.0;
    const Mat eps = simulate_dcc_eps_path(0.05, 0.90, qbar, 5000, 77);
    const DccModel fit = fit_dcc11(eps);
    CHECK(std::fabs(fit.a - 0.05) < 0.06);
    CHECK(std::fabs(fit.b - 0.90) < 0.06);
    CHECK(fit.a + fit.b < 1.0);
}

TEST_CASE("correlation path has unit diagonal and positive eigenvalues") {
    Mat qbar(3, 3);
    qbar << 1.0, 0.4, 0.2,
            0.4, 1.0, 0.3,
            0.2, 0.3, 1.0;
    const Mat eps = simulate_dcc_eps_path(0.04, 0.9, qbar, 400, 13);
    DccModel m;
    m.a = 0.04;
    m.b = 0.9;
    m.qbar = qbar;
    for (const auto& r : dcc_correlation_path(m, eps)) {
        for (int i = 0; i < 3; ++i) CHECK(std::fabs(r(i, i) - 1.0) < 1e-12);
        Eigen::SelfAdjointEigenSolver<Mat> es(r);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("one-step simulation matches moments and is reproducible") {
    const int d = 2;
    DccModel m;
    m.a = 0.0;
    m.b = 0.0;
    m.qbar = Mat::Identity(d, d);
    m.last_q = m.qbar;
    m.last_eps = Vec::Zero(d);
    m.mu = Vec::Zero(d);
    for (int j = 0; j < d; ++j) {
        GarchModel g;
        g.mu = 0.0;
        g.alpha0 = 1.0;
        g.alpha1 = 0.0;
        g.beta1 = 0.0;
        g.last_h = 1.0;
        g.last_a = 0.0;
        m.garch.push_back(g);
    }

    const int n = 1000000;
    const Mat sim = simulate_dcc(m, n, 5);
    const Mat sim2 = simulate_dcc(m, n, 5);
    CHECK((sim.array() == sim2.array()).all());

    // columns should average to mu within 4 sigma / sqrt(n)
    for (int j = 0; j < d; ++j)
        CHECK(std::fabs(sim.col(j).mean()) < 4.0 / std::sqrt(static_cast<double>(n)));
    // independence: cross correlation within +-0.01
    const double corr = (sim.col(0).array() * sim.col(1).array()).mean();
    CHECK(std::fabs(corr) < 0.01);
}

TEST_CASE("student t dcc keeps unit variance scaling") {
    Mat qbar = Mat::Identity(2, 2);
    const Mat eps = simulate_dcc_eps_path(0.0, 0.0, qbar, 20000, 3,
                                          InnovationDist::StudentT, 7.0);
    for (int j = 0; j < 2; ++j)
        CHECK(eps.col(j).squaredNorm() / eps.rows() == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("student t dcc profile recovers the tail index") {
    Mat qbar(2, 2);
    qbar << 1.0, 0.5,
            0.5, 1.0;
    const Mat eps = simulate_dcc_eps_path(0.03, 0.9, qbar, 4000, 17,
                                          InnovationDist::StudentT, 6.0);
    const DccModel fit = fit_dcc11(eps, InnovationDist::StudentT);
    CHECK(fit.nu > 3.5);
    CHECK(fit.nu < 10.0);
}

TEST_CASE("json round trip for garch and dcc") {
    GarchModel g;
    g.mu = 0.01;
    g.alpha0 = 0.02;
    g.alpha1 = 0.08;
    g.beta1 = 0.9;
    g.last_h = 0.5;
    g.last_a = -0.1;
    const GarchModel g2 = garch_from_json(garch_to_json(g));
    CHECK(g2.alpha0 == g.alpha0);
    CHECK(g2.beta1 == g.beta1);
    CHECK(g2.last_h == g.last_h);

    DccModel m;
    m.a = 0.03;
    m.b = 0.9;
    m.qbar = Mat::Identity(2, 2);
    m.last_q = m.qbar;
    m.last_eps = Vec::Zero(2);
    m.mu = Vec::Zero(2);
    m.garch = {g, g};
    const DccModel m2 = dcc_from_json(dcc_to_json(m));
    CHECK(m2.a == m.a);
    CHECK(m2.garch.size() == 2);
    CHECK((m2.qbar.array() == m.qbar.array()).all());
}

TEST_SUITE_END();
