#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// All objectives are evaluated under a maximization convention: for the
// "min" objectives the negated quantity is returned, so argmax matches the
// original argmin.
enum class ObjectiveTag {
    Kelly,
    KellyExpansion4,
    MinVariance,
    MaxExpRetn,
    MinDownsideFreq,
    MinDownsideVariance,
    MaxSharpe,
    MaxSortino,
    MaxBernadoLedoit,
    MinVaR,
    MinES,
    LongParity,
    ShortParity,
    VarianceParity,
};

struct ObjectiveKind {
    ObjectiveTag tag = ObjectiveTag::MaxExpRetn;
    double alpha = 0.05;  // MinVaR / MinES only
};

// Table labels: "Kelly", "minVariance", "maxExpRetn", "minDownsideFreq",
// "minDownsideVariance", "maxSharpeRatio", "maxSortinoRatio",
// "maxBernadoLedoitRatio", "minVaR 0.05|0.1|0.5", "minES 0.05|0.1|0.5",
// "LongParity", "ShortParity", "VarianceParity", "KellyExpansion4".
std::string objective_label(const ObjectiveKind& kind);
ObjectiveKind objective_from_label(const std::string& label);
const std::vector<ObjectiveKind>& all_objectives();

struct ObjectiveContext {
    const Mat& scenarios;  // N x D simulated returns
    Vec w1;                // pre-rebalance weights
    double c = 0.005;      // transaction cost fraction
    double v = 1.0;        // cost-aversion multiplier (optimization-side only)
    // classical gain/loss ratio instead of the printed Bernado-Ledoit form
    bool bernado_ledoit_classical = false;
};

// r_p[i] = sum_d R(i,d) w0[d] - c*v*||w0-w1||_1
Vec portfolio_return_scenarios(const Vec& w0, const ObjectiveContext& ctx);

double evaluate_objective(const ObjectiveKind& kind, const Vec& w0, const ObjectiveContext& ctx);

// 4th-order log(1+x) expansion summed over all N*D cells of R .* w0.
double kelly_expansion4(const Vec& w0, const ObjectiveContext& ctx);

// empirical quantile at the order statistic ceil(alpha*N), and the
// fractionally-weighted tail average below it
double empirical_var(const Vec& r_p, double alpha);
double empirical_es(const Vec& r_p, double alpha);

inline double kelly_sentinel() { return -std::numeric_limits<double>::infinity(); }

}  // namespace genport
