#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "genport/optimizer.hpp"
#include "genport/rng.hpp"

using namespace genport;

TEST_SUITE_BEGIN("optimizer");

TEST_CASE("projection examples") {
    Vec z(2);
    z << 2.0, 0.0;
    const Vec w = project_feasible(z, 5.0);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(0.0));

    Vec eq = Vec::Constant(4, 0.25);
    CHECK((project_feasible(eq, 5.0) - eq).cwiseAbs().maxCoeff() < 1e-12);

    Vec big(3);
    big << 10.0, 1.0, 1.0;
    const Vec clamped = project_feasible(big, 1.0);  // box = 1/3
    for (int i = 0; i < 3; ++i) CHECK(clamped[i] == doctest::Approx(1.0 / 3.0));

    const Vec zero = project_feasible(Vec::Zero(3), 5.0);
    for (int i = 0; i < 3; ++i) CHECK(zero[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("projection lands in the feasible set from random points") {
    RngStream rs(substream(1, RngPurpose::Test));
    for (int rep = 0; rep < 200; ++rep) {
        const int d = 2 + static_cast<int>(rs.below(10));
        Vec z(d);
        for (int i = 0; i < d; ++i) z[i] = 3.0 * rs.normal();
        for (double m : {1.5, 5.0}) {
            const Vec w = project_feasible(z, m);
            CHECK(weights_feasible(w, m));
        }
    }
}

TEST_CASE("min variance matches the closed-form markowitz solution") {
    // negatively correlated assets make the long-only book globally optimal
    // on the L1 sphere, so the Markowitz sum-one oracle applies; the box at
    // m = 5 is inactive
    Vec sd(3);
    sd << 1.0, 1.4, 0.8;
    Mat corr = Mat::Constant(3, 3, -0.4);
    for (int i = 0; i < 3; ++i) corr(i, i) = 1.0;
    Mat sigma = sd.asDiagonal() * corr * sd.asDiagonal();
    const Eigen::LLT<Mat> llt(sigma);
    const Mat l = llt.matrixL();

    const int n = 200000;
    Mat scen(n, 3);
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(3, RngPurpose::Test, static_cast<std::uint64_t>(i)));
        Vec z(3);
        for (int j = 0; j < 3; ++j) z[j] = rs.normal();
        scen.row(i) = (0.01 * (l * z)).transpose();
    }

    ObjectiveContext ctx{scen, Vec::Constant(3, 1.0 / 3.0), 0.0, 1.0, false};
    const SolveReport rep = solve_weights({ObjectiveTag::MinVariance, 0.0}, ctx, 5.0, 11);

    // oracle from the sample covariance of the actual scenarios
    const Mat centered = scen.rowwise() - scen.colwise().mean();
    const Mat cov = (centered.transpose() * centered) / n;
    const Vec ones = Vec::Ones(3);
    const Vec oracle = cov.ldlt().solve(ones) / ones.dot(cov.ldlt().solve(ones));

    CHECK((rep.w_star - oracle).cwiseAbs().maxCoeff() < 0.02);
    CHECK(weights_feasible(rep.w_star, 5.0));
}

TEST_CASE("long and short parity short-circuit to closed forms") {
    Mat scen = Mat::Constant(120, 4, 0.01);
    ObjectiveContext ctx{scen, Vec::Zero(4), 0.005, 1.0, false};
    const SolveReport lp = solve_weights({ObjectiveTag::LongParity, 0.0}, ctx, 5.0, 1);
    for (int i = 0; i < 4; ++i) CHECK(lp.w_star[i] == 0.25);
    const SolveReport sp = solve_weights({ObjectiveTag::ShortParity, 0.0}, ctx, 5.0, 1);
    for (int i = 0; i < 4; ++i) CHECK(sp.w_star[i] == -0.25);
}

TEST_CASE("kelly binary bet solved to the grid optimum") {
    const int n = 1000;
    Mat scen(n, 2);
    for (int i = 0; i < n; ++i) {
        scen(i, 0) = i < 600 ? 1.0 : -1.0;
        scen(i, 1) = 0.0;
    }
    ObjectiveContext ctx{scen, Vec::Constant(2, 0.5), 0.0, 1.0, false};
    const SolveReport rep = solve_weights({ObjectiveTag::Kelly, 0.0}, ctx, 5.0, 17);
    CHECK(std::fabs(rep.w_star[0] - 0.2) < 0.02);
}

TEST_CASE("symmetric iid assets split evenly under min variance") {
    const int n = 100000;
    Mat scen(n, 2);
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(7, RngPurpose::Test, static_cast<std::uint64_t>(i)));
        scen(i, 0) = 0.02 * rs.normal();
        scen(i, 1) = 0.02 * rs.normal();
    }
    ObjectiveContext ctx{scen, Vec::Constant(2, 0.5), 0.0, 1.0, false};
    const SolveReport rep = solve_weights({ObjectiveTag::MinVariance, 0.0}, ctx, 5.0, 23);
    CHECK(std::fabs(rep.w_star[0] - 0.5) < 0.02);
    CHECK(std::fabs(rep.w_star[1] - 0.5) < 0.02);
}

TEST_CASE("solver beats or matches the w1 start and is deterministic") {
    RngStream rs(substream(9, RngPurpose::Test));
    const int n = 2000;
    Mat scen(n, 3);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 3; ++j) scen(i, j) = 0.01 * (j + 1) * rs.normal() + 0.001 * j;
    Vec w1(3);
    w1 << 0.2, 0.4, 0.4;
    ObjectiveContext ctx{scen, w1, 0.005, 2.0, false};

    for (const auto& kind : {ObjectiveKind{ObjectiveTag::MaxSharpe, 0.0},
                             ObjectiveKind{ObjectiveTag::MinES, 0.1},
                             ObjectiveKind{ObjectiveTag::Kelly, 0.0}}) {
        const SolveReport a = solve_weights(kind, ctx, 5.0, 31);
        const SolveReport b = solve_weights(kind, ctx, 5.0, 31);
        INFO("objective ", objective_label(kind));
        CHECK((a.w_star.array() == b.w_star.array()).all());
        CHECK(a.objective_value ==
              doctest::Approx(evaluate_objective(kind, a.w_star, ctx)).epsilon(1e-12));
        const double at_start =
            evaluate_objective(kind, project_feasible(w1, 5.0), ctx);
        CHECK(a.objective_value >= at_start - 1e-12);
        CHECK(weights_feasible(a.w_star, 5.0));
    }
}

TEST_CASE("solve report serializes") {
    Mat scen = Mat::Constant(120, 2, 0.01);
    ObjectiveContext ctx{scen, Vec::Constant(2, 0.5), 0.005, 1.0, false};
    const SolveReport rep = solve_weights({ObjectiveTag::LongParity, 0.0}, ctx, 5.0, 3);
    const auto j = solve_report_to_json(rep);
    CHECK(j.at("w_star").size() == 2);
    CHECK(j.at("objective_value").get<double>() == rep.objective_value);
    CHECK(j.at("n_restarts").get<int>() == rep.n_restarts);
}

TEST_CASE("all-sentinel kelly falls back to equal long") {
    // one asset swinging +-200%: any unit-L1 position is wiped out in one
    // of the two scenarios, so every start hits the sentinel
    Mat scen(200, 1);
    for (int i = 0; i < 200; ++i) scen(i, 0) = i % 2 ? 2.0 : -2.0;
    ObjectiveContext ctx{scen, Vec::Constant(1, 1.0), 0.0, 1.0, false};
    const SolveReport rep = solve_weights({ObjectiveTag::Kelly, 0.0}, ctx, 5.0, 37);
    CHECK(rep.fallback);
    CHECK(rep.w_star[0] == doctest::Approx(1.0));
}

TEST_SUITE_END();
