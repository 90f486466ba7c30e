#include <doctest.h>

#include <cmath>

#include "genport/backtest.hpp"
#include "genport/rng.hpp"
#include "genport/special.hpp"

using namespace genport;

TEST_SUITE_BEGIN("backtest");

namespace {

ReturnPanel small_panel(int steps, int assets, double corr, std::uint64_t seed) {
    const PricePanel p = make_synthetic_panel(2 * steps + 1, assets, corr, 0.03, seed);
    return compute_returns(p, 2);
}

BacktestConfig quick_config() {
    BacktestConfig cfg;
    cfg.fit_window = 40;
    cfg.blend_window = 10;
    cfg.n_scenarios = 300;
    cfg.parametric_families = {MarginalFamily::Gaussian, MarginalFamily::StudentT};
    return cfg;
}

}  // namespace

TEST_CASE("measure identities") {
    Vec w0(2), w1(2), r(2);
    w0 << 0.5, 0.5;
    w1 = w0;
    r << 0.1, -0.1;  // orthogonal to w0
    const StepMeasures m = step_measures(w0, w1, r, 0.005);
    CHECK(m.logit_cosine == doctest::Approx(0.0));
    CHECK(m.logit_turnover == doctest::Approx(logit(1e-9)));
    CHECK(m.logit_turnover == doctest::Approx(-20.7).epsilon(0.01));
    CHECK(m.r_p == doctest::Approx(0.0));

    // exact antisymmetry of logit-cosine under weight negation
    RngStream rs(substream(1, RngPurpose::Test));
    for (int rep = 0; rep < 1000; ++rep) {
        const int d = 2 + static_cast<int>(rs.below(8));
        Vec w(d), rr(d), w1r(d);
        for (int i = 0; i < d; ++i) {
            w[i] = rs.normal();
            rr[i] = 0.05 * rs.normal();
            w1r[i] = rs.normal();
        }
        const double plus = step_measures(w, w1r, rr, 0.005).logit_cosine;
        const double minus = step_measures(Vec(-w), w1r, rr, 0.005).logit_cosine;
        CHECK(std::fabs(plus + minus) <= 1e-12);
    }
}

TEST_CASE("drift renormalizes by portfolio value") {
    Vec w0(2), r(2);
    w0 << 0.5, 0.5;
    r << 0.1, -0.1;
    const Vec w1 = drift_weights(w0, r);
    CHECK(w1[0] == doctest::Approx(0.55));
    CHECK(w1[1] == doctest::Approx(0.45));
    CHECK(w1.sum() == doctest::Approx(1.0));
}

TEST_CASE("constant prices produce nonpositive arm returns and zero parity returns") {
    PricePanel p;
    p.assets = {"A", "B"};
    const int steps = 101;
    p.prices = Mat::Constant(steps, 2, 50.0);
    p.timestamps.resize(steps);
    for (int i = 0; i < steps; ++i) p.timestamps[i] = 86400LL * i;
    const ReturnPanel panel = compute_returns(p, 2);

    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::LongParity, 0.0}, 1.0}};
    // constant returns cannot support a model fit; the engine carries equal-long
    const auto paths = run_fixed_backtest(cfg, panel, arms, {1});
    REQUIRE(paths.size() == 1);
    for (std::size_t k = 0; k < paths[0].records.size(); ++k) {
        const auto& rec = paths[0].records[k];
        CHECK(rec.r_p <= 1e-15);
        if (k > 0) CHECK(rec.r_p == doctest::Approx(0.0));  // no motion after the first step
    }
}

TEST_CASE("single-asset max-expected-return pins the weight at +-1") {
    const ReturnPanel panel = small_panel(60, 1, 0.0, 3);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::MaxExpRetn, 0.0}, 1.0}};
    const auto paths = run_fixed_backtest(cfg, panel, arms, {7});
    for (const auto& rec : paths[0].records)
        CHECK(std::fabs(std::fabs(rec.w0[0]) - 1.0) < 1e-6);
}

TEST_CASE("fixed backtest is deterministic") {
    const ReturnPanel panel = small_panel(55, 2, 0.5, 5);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::MaxSharpe, 0.0}, 2.0}};
    const auto a = run_fixed_backtest(cfg, panel, arms, {11});
    const auto b = run_fixed_backtest(cfg, panel, arms, {11});
    REQUIRE(a[0].records.size() == b[0].records.size());
    for (std::size_t k = 0; k < a[0].records.size(); ++k) {
        CHECK(a[0].records[k].r_p == b[0].records[k].r_p);
        CHECK((a[0].records[k].w0.array() == b[0].records[k].w0.array()).all());
    }
}

TEST_CASE("wealth equals the running product of step returns") {
    const ReturnPanel panel = small_panel(55, 2, 0.4, 9);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::Kelly, 0.0}, 1.0}};
    const auto paths = run_fixed_backtest(cfg, panel, arms, {13});
    double acc = 1.0;
    for (const auto& rec : paths[0].records) {
        acc *= 1.0 + rec.r_p;
        CHECK(std::fabs(acc - rec.wealth) < 1e-10 * std::max(1.0, std::fabs(acc)));
    }
}

TEST_CASE("no look-ahead: poisoning future rows leaves decisions unchanged") {
    const ReturnPanel panel = small_panel(60, 2, 0.4, 21);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::MaxSharpe, 0.0}, 1.0}};
    const auto clean = run_fixed_backtest(cfg, panel, arms, {17});

    ReturnPanel poisoned = panel;
    const int cut = cfg.fit_window + 5;  // poison everything from row `cut` on
    for (Eigen::Index t = cut; t < poisoned.steps(); ++t)
        poisoned.returns.row(t).setConstant(0.77);
    const auto dirty = run_fixed_backtest(cfg, poisoned, arms, {17});

    // w0 at rows <= cut depends only on rows < cut, which are identical
    for (std::size_t k = 0; k < clean[0].records.size(); ++k) {
        if (clean[0].records[k].row > cut) break;
        CHECK((clean[0].records[k].w0.array() == dirty[0].records[k].w0.array()).all());
    }
}

TEST_CASE("pre-rebalance weights roll forward from the previous decision") {
    const ReturnPanel panel = small_panel(55, 2, 0.4, 25);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::MinVariance, 0.0}, 1.0}};
    const auto paths = run_fixed_backtest(cfg, panel, arms, {19});
    const auto& recs = paths[0].records;
    for (std::size_t k = 1; k < recs.size(); ++k) {
        const Vec expected =
            drift_weights(recs[k - 1].w0, panel.returns.row(recs[k - 1].row).transpose());
        CHECK((recs[k].w1 - expected).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("benchmark on flat prices returns zero and d = 1 matches buy and hold") {
    PricePanel p;
    p.assets = {"A"};
    p.prices = Mat::Constant(21, 1, 10.0);
    p.timestamps.resize(21);
    for (int i = 0; i < 21; ++i) p.timestamps[i] = 86400LL * i;
    const ReturnPanel flat = compute_returns(p, 2);
    for (const auto& rec : benchmark_path(flat)) CHECK(rec.r_p == 0.0);

    const ReturnPanel single = small_panel(30, 1, 0.0, 31);
    const auto bench = benchmark_path(single);
    double growth = 1.0;
    for (Eigen::Index t = 0; t < single.steps(); ++t) growth *= 1.0 + single.returns(t, 0);
    CHECK(bench.back().wealth == doctest::Approx(growth).epsilon(1e-12));
}

TEST_CASE("benchmark turnover reflects re-equalization drift (hand computation)") {
    PricePanel p;
    p.assets = {"A", "B"};
    p.prices.resize(3, 2);
    p.prices << 100, 100,
                110, 100,
                121, 100;
    p.timestamps = {0, 86400, 2 * 86400};
    const ReturnPanel panel = compute_returns(p, 1);
    const auto bench = benchmark_path(panel);
    REQUIRE(bench.size() == 2);
    // after step 1 the drifted book is (0.55, 0.5)/1.05; re-equalizing trades
    // 2 * |0.5 - 0.55/1.05| of gross value
    const double drifted = 0.55 / 1.05;
    const double expected_turns = 2.0 * std::fabs(0.5 - drifted);
    CHECK(bench[1].logit_turnover == doctest::Approx(logit(expected_turns / 2.0)));
}

TEST_CASE("mirrored parity arms have mirrored logit-cosine at every step") {
    const ReturnPanel panel = small_panel(55, 3, 0.5, 41);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::LongParity, 0.0}, 1.0},
                                 {"mv norm", {ObjectiveTag::ShortParity, 0.0}, 1.0}};
    const auto paths = run_fixed_backtest(cfg, panel, arms, {43});
    REQUIRE(paths.size() == 2);
    for (std::size_t k = 0; k < paths[0].records.size(); ++k)
        CHECK(paths[0].records[k].logit_cosine ==
              doctest::Approx(-paths[1].records[k].logit_cosine).epsilon(1e-12));
}

TEST_CASE("single-arm eclectic path equals the arm itself") {
    const ReturnPanel panel = small_panel(55, 2, 0.5, 51);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::MaxSharpe, 0.0}, 1.0}};
    const auto fixed = run_fixed_backtest(cfg, panel, arms, {53});
    BanditConfig bc;
    bc.window = cfg.blend_window;
    const auto ecl = run_eclectic_backtest(cfg, panel, fixed, {bc});
    REQUIRE(ecl.size() == 1);
    for (std::size_t k = 0; k < ecl[0].records.size(); ++k) {
        CHECK((ecl[0].records[k].w0.array() == fixed[0].records[k].w0.array()).all());
        CHECK(ecl[0].records[k].psi[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("two identical arms blend to an even split") {
    const ReturnPanel panel = small_panel(55, 2, 0.5, 61);
    BacktestConfig cfg = quick_config();
    std::vector<ArmSpec> arms = {{"mv norm", {ObjectiveTag::MaxSharpe, 0.0}, 1.0},
                                 {"mv norm", {ObjectiveTag::MaxSharpe, 0.0}, 1.0}};
    const auto fixed = run_fixed_backtest(cfg, panel, arms, {63});
    BanditConfig bc;
    bc.similarity = SimilarityKind::Cosine;
    bc.activation = ActivationKind::Logit;
    bc.policy = PolicyKind::Blend;
    bc.window = cfg.blend_window;
    const auto ecl = run_eclectic_backtest(cfg, panel, fixed, {bc});
    for (const auto& rec : ecl[0].records) {
        CHECK(rec.psi[0] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(rec.psi[1] == doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("switching locks onto a dominating arm") {
    // hand-built fixed paths: arm 0 always aligned with realized returns,
    // arm 1 always opposed
    const ReturnPanel panel = small_panel(40, 2, 0.0, 71);
    BacktestConfig cfg = quick_config();
    cfg.fit_window = 10;

    FixedPath good, bad;
    good.arm = {"mv norm", {ObjectiveTag::MaxExpRetn, 0.0}, 1.0};
    bad.arm = {"mv norm", {ObjectiveTag::MaxExpRetn, 0.0}, 2.0};
    good.seed = bad.seed = 5;
    for (Eigen::Index t = cfg.fit_window; t < panel.steps(); ++t) {
        const Vec r = panel.returns.row(t).transpose();
        StepRecord g, b;
        g.row = b.row = static_cast<int>(t);
        g.t = b.t = panel.timestamps[t];
        Vec dir = r;
        const double l1 = dir.cwiseAbs().sum();
        if (l1 > 0) dir /= l1;
        g.w0 = dir;
        b.w0 = -dir;
        g.w1 = b.w1 = Vec::Constant(2, 0.5);
        good.records.push_back(g);
        bad.records.push_back(b);
    }

    BanditConfig bc;
    bc.similarity = SimilarityKind::Cosine;
    bc.activation = ActivationKind::Maxout;
    bc.policy = PolicyKind::Switch;
    bc.gamma = 0.99;
    bc.window = 10;
    const auto ecl = run_eclectic_backtest(cfg, panel, {good, bad}, {bc});
    for (std::size_t k = 2; k < ecl[0].records.size(); ++k) {
        CHECK(ecl[0].records[k].psi[0] == 1.0);
        CHECK(ecl[0].records[k].psi[1] == 0.0);
    }
}

TEST_SUITE_END();
