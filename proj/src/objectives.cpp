#include "genport/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "genport/kernels.hpp"

namespace genport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_alpha(double a) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%g", a);
    return buf;
}

double cost_term(const Vec& w0, const ObjectiveContext& ctx) {
    return ctx.c * ctx.v * (w0 - ctx.w1).cwiseAbs().sum();
}

}  // namespace

std::string objective_label(const ObjectiveKind& kind) {
    switch (kind.tag) {
        case ObjectiveTag::Kelly: return "Kelly";
        case ObjectiveTag::KellyExpansion4: return "KellyExpansion4";
        case ObjectiveTag::MinVariance: return "minVariance";
        case ObjectiveTag::MaxExpRetn: return "maxExpRetn";
        case ObjectiveTag::MinDownsideFreq: return "minDownsideFreq";
        case ObjectiveTag::MinDownsideVariance: return "minDownsideVariance";
        case ObjectiveTag::MaxSharpe: return "maxSharpeRatio";
        case ObjectiveTag::MaxSortino: return "maxSortinoRatio";
        case ObjectiveTag::MaxBernadoLedoit: return "maxBernadoLedoitRatio";
        case ObjectiveTag::MinVaR: return "minVaR " + format_alpha(kind.alpha);
        case ObjectiveTag::MinES: return "minES " + format_alpha(kind.alpha);
        case ObjectiveTag::LongParity: return "LongParity";
        case ObjectiveTag::ShortParity: return "ShortParity";
        case ObjectiveTag::VarianceParity: return "VarianceParity";
    }
    return "unknown";
}

ObjectiveKind objective_from_label(const std::string& label) {
    for (const auto& k : all_objectives())
        if (objective_label(k) == label) return k;
    // allow arbitrary alpha, e.g. "minVaR 0.25"
    if (label.rfind("minVaR ", 0) == 0)
        return {ObjectiveTag::MinVaR, std::stod(label.substr(7))};
    if (label.rfind("minES ", 0) == 0)
        return {ObjectiveTag::MinES, std::stod(label.substr(6))};
    throw std::invalid_argument("unknown objective label: " + label);
}

const std::vector<ObjectiveKind>& all_objectives() {
    static const std::vector<ObjectiveKind> kinds = [] {
        std::vector<ObjectiveKind> v;
        v.push_back({ObjectiveTag::Kelly, 0.0});
        v.push_back({ObjectiveTag::KellyExpansion4, 0.0});
        v.push_back({ObjectiveTag::MinVariance, 0.0});
        v.push_back({ObjectiveTag::MaxExpRetn, 0.0});
        v.push_back({ObjectiveTag::MinDownsideFreq, 0.0});
        v.push_back({ObjectiveTag::MinDownsideVariance, 0.0});
        v.push_back({ObjectiveTag::MaxSharpe, 0.0});
        v.push_back({ObjectiveTag::MaxSortino, 0.0});
        v.push_back({ObjectiveTag::MaxBernadoLedoit, 0.0});
        for (double a : {0.05, 0.1, 0.5}) v.push_back({ObjectiveTag::MinVaR, a});
        for (double a : {0.05, 0.1, 0.5}) v.push_back({ObjectiveTag::MinES, a});
        v.push_back({ObjectiveTag::LongParity, 0.0});
        v.push_back({ObjectiveTag::ShortParity, 0.0});
        v.push_back({ObjectiveTag::VarianceParity, 0.0});
        return v;
    }();
    return kinds;
}

Vec portfolio_return_scenarios(const Vec& w0, const ObjectiveContext& ctx) {
    if (ctx.scenarios.cols() != w0.size() || ctx.w1.size() != w0.size())
        throw std::invalid_argument("dimension mismatch in portfolio returns");
    return portfolio_returns(ctx.scenarios, w0, cost_term(w0, ctx));
}

double kelly_expansion4(const Vec& w0, const ObjectiveContext& ctx) {
    const Mat& r = ctx.scenarios;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            const double x = r(i, j) * w0[j];
            const double x2 = x * x;
            acc += x - 0.5 * x2 + x2 * x / 3.0 - 0.25 * x2 * x2;
        }
    return acc;
}

double empirical_var(const Vec& r_p, double alpha) {
    const Eigen::Index n = r_p.size();
    const Eigen::Index k = static_cast<Eigen::Index>(std::ceil(alpha * n));
    if (k < 1 || k > n) throw std::invalid_argument("bad quantile level");
    std::vector<double> v(r_p.data(), r_p.data() + n);
    std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
    return v[k - 1];
}

double empirical_es(const Vec& r_p, double alpha) {
    const Eigen::Index n = r_p.size();
    const Eigen::Index k = static_cast<Eigen::Index>(std::ceil(alpha * n));
    if (k < 1 || k > n) throw std::invalid_argument("bad quantile level");
    std::vector<double> v(r_p.data(), r_p.data() + n);
    std::nth_element(v.begin(), v.begin() + (k - 1), v.end());
    const double q = v[k - 1];
    double acc = 0.0;
    for (Eigen::Index i = 0; i < k - 1; ++i) acc += v[i];
    acc += (alpha * n - (k - 1)) * q;  // quantile scenario at fractional weight
    return acc / (alpha * n);
}

double evaluate_objective(const ObjectiveKind& kind, const Vec& w0, const ObjectiveContext& ctx) {
    const Eigen::Index d = w0.size();

    // parity objectives read the weights (and per-asset dispersion) only
    if (kind.tag == ObjectiveTag::LongParity || kind.tag == ObjectiveTag::ShortParity) {
        const double norm = w0.norm();
        if (norm == 0.0) return -kInf;
        const double c = w0.sum() / (norm * std::sqrt(static_cast<double>(d)));
        return kind.tag == ObjectiveTag::LongParity ? c : -c;
    }
    if (kind.tag == ObjectiveTag::VarianceParity) {
        // sigma_d over scenarios of r_d*w_d - c*v*|w_d - w1_d|; the cost term
        // is constant across scenarios, so only w_d^2 Var(r_d) survives
        Vec v(d);
        const Eigen::Index n = ctx.scenarios.rows();
        for (Eigen::Index j = 0; j < d; ++j) {
            const double mean = ctx.scenarios.col(j).mean() * w0[j];
            double var = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double x = ctx.scenarios(i, j) * w0[j] - mean;
                var += x * x;
            }
            v[j] = w0[j] * (var / n);
        }
        const double norm = v.norm();
        if (norm == 0.0) return -kInf;
        return v.sum() / (norm * std::sqrt(static_cast<double>(d)));
    }
    if (kind.tag == ObjectiveTag::KellyExpansion4) return kelly_expansion4(w0, ctx);

    const Vec r_p = portfolio_return_scenarios(w0, ctx);
    const Eigen::Index n = r_p.size();
    const double mean = r_p.mean();

    switch (kind.tag) {
        case ObjectiveTag::Kelly: {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (1.0 + r_p[i] <= 1e-8) return kelly_sentinel();
                acc += std::log1p(r_p[i]);
            }
            return acc / n;
        }
        case ObjectiveTag::MinVariance: {
            double var = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) var += (r_p[i] - mean) * (r_p[i] - mean);
            return -var / n;
        }
        case ObjectiveTag::MaxExpRetn:
            return mean;
        case ObjectiveTag::MinDownsideFreq: {
            Eigen::Index cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (r_p[i] < 0.0) ++cnt;
            return -static_cast<double>(cnt) / n;
        }
        case ObjectiveTag::MinDownsideVariance: {
            double acc = 0.0;
            Eigen::Index cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (r_p[i] < 0.0) { acc += r_p[i] * r_p[i]; ++cnt; }
            if (cnt == 0) return 0.0;  // empty downside set contributes no penalty
            return -acc / cnt;
        }
        case ObjectiveTag::MaxSharpe: {
            double var = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) var += (r_p[i] - mean) * (r_p[i] - mean);
            const double sigma = std::sqrt(var / n);
            if (sigma == 0.0) return -kInf;
            const double arg = 100.0 + mean / sigma;
            return arg > 0.0 ? std::log(arg) : -kInf;
        }
        case ObjectiveTag::MaxSortino: {
            double acc = 0.0;
            Eigen::Index cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (r_p[i] < 0.0) { acc += r_p[i] * r_p[i]; ++cnt; }
            const double sigma = cnt == 0 ? 0.0 : std::sqrt(acc / cnt);
            if (sigma == 0.0) return -kInf;
            const double arg = 100.0 + mean / sigma;
            return arg > 0.0 ? std::log(arg) : -kInf;
        }
        case ObjectiveTag::MaxBernadoLedoit: {
            double abs_sum = 0.0, down_sum = 0.0;
            Eigen::Index down_cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                abs_sum += std::fabs(r_p[i]);
                if (r_p[i] < 0.0) { down_sum += std::fabs(r_p[i]); ++down_cnt; }
            }
            const double e_abs = abs_sum / n;
            const double e_down = down_cnt == 0 ? 0.0 : down_sum / down_cnt;
            if (e_abs <= 0.0) return -kInf;
            if (ctx.bernado_ledoit_classical) {
                // gain/loss ratio: E[r+]/E[r-]
                double up = 0.0, dn = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (r_p[i] > 0.0) up += r_p[i];
                    else dn -= r_p[i];
                }
                if (dn <= 0.0) return kInf;
                return std::log(up / dn);
            }
            return std::log(e_abs) - std::log(e_abs + e_down);
        }
        case ObjectiveTag::MinVaR:
            return empirical_var(r_p, kind.alpha);
        case ObjectiveTag::MinES:
            return empirical_es(r_p, kind.alpha);
        default:
            throw std::logic_error("unhandled objective");
    }
}

}  // namespace genport
