#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "genport/bandit.hpp"
#include "genport/data.hpp"
#include "genport/objectives.hpp"
#include "genport/scenarios.hpp"

namespace genport {

struct ArmSpec {
    std::string genmodel;
    ObjectiveKind objective;
    double v = 1.0;  // cost-aversion inside the optimization only

    std::string id() const;
};

struct BanditConfig {
    SimilarityKind similarity = SimilarityKind::Cosine;
    ActivationKind activation = ActivationKind::Logit;
    double gamma = 0.999;
    PolicyKind policy = PolicyKind::Blend;
    int window = 26;

    std::string id() const;
};

struct BacktestConfig {
    int fit_window = 91;    // rolling steps used to fit the generative model
    int blend_window = 26;  // optimality lookback for the bandit layer
    double c = 0.005;
    double m = 5.0;
    int n_scenarios = 1000;
    bool leaky_relu_verbatim = true;
    bool bernado_ledoit_classical = false;
    bool vine_include_joe = true;
    std::vector<MarginalFamily> parametric_families;  // empty = all
};

struct StepRecord {
    int row = 0;  // return-panel row realized over this step
    std::int64_t t = 0;
    Vec w0;
    Vec w1;  // pre-rebalance weights
    double r_p = 0.0;
    double logit_cosine = 0.0;
    double logit_turnover = 0.0;
    double wealth = 1.0;  // cumulative product state after this step
    Vec psi;              // eclectic paths only
    bool fit_failed = false;
};

struct StepMeasures {
    double r_p;
    double logit_cosine;
    double logit_turnover;
};

// r_p charges the realized cost c*||w0-w1||_1 (no aversion multiplier);
// logit arguments are clamped into [1e-9, 1-1e-9].
StepMeasures step_measures(const Vec& w0, const Vec& w1_pre, const Vec& realized, double c);

// post-rebalance weights drifted by realized growth and renormalized by
// gross portfolio value; the cash remainder of an eclectic book stays cash
Vec drift_weights(const Vec& w0, const Vec& realized);

struct FixedPath {
    ArmSpec arm;
    std::uint64_t seed = 0;
    std::vector<StepRecord> records;
};

struct EclecticPath {
    BanditConfig bandit;
    std::uint64_t seed = 0;
    std::vector<StepRecord> records;
};

// One job per (arm, seed), scheduled over OpenMP and merged in input order.
std::vector<FixedPath> run_fixed_backtest(const BacktestConfig& cfg, const ReturnPanel& panel,
                                          const std::vector<ArmSpec>& arms,
                                          const std::vector<std::uint64_t>& seeds);

// Reuses the fixed-arm paths (matched by seed) as the bandit's arms.
std::vector<EclecticPath> run_eclectic_backtest(const BacktestConfig& cfg,
                                                const ReturnPanel& panel,
                                                const std::vector<FixedPath>& fixed,
                                                const std::vector<BanditConfig>& bandits);

// Long-weight parity with no transaction costs.
std::vector<StepRecord> benchmark_path(const ReturnPanel& panel, int start_row = 0);

void write_fixed_csv(const std::string& path, const FixedPath& p,
                     const std::vector<std::string>& assets);
void write_eclectic_csv(const std::string& path, const EclecticPath& p,
                        const std::vector<std::string>& assets);

}  // namespace genport
