#include "genport/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "genport/optim.hpp"
#include "genport/special.hpp"

namespace genport {

namespace {

constexpr double kNuFloor = 2.05;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_mean(const Vec& x) { return x.mean(); }

double sample_std(const Vec& x) {
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().sum() / x.size());
}

// Tukey-lambda quantile S(u) and its derivative; loc/scale applied outside.
double tl_quantile(double u, double lam) {
    if (std::fabs(lam) < 1e-8) return std::log(u) - std::log1p(-u);
    return (std::pow(u, lam) - std::pow(1.0 - u, lam)) / lam;
}

double tl_quantile_density(double u, double lam) {
    if (std::fabs(lam) < 1e-8) return 1.0 / u + 1.0 / (1.0 - u);
    return std::pow(u, lam - 1.0) + std::pow(1.0 - u, lam - 1.0);
}

double tl_cdf_std(double z, double lam) {
    // invert S on (0,1); S is strictly increasing
    if (lam > 1e-8) {
        if (z <= -1.0 / lam) return 0.0;
        if (z >= 1.0 / lam) return 1.0;
    }
    return invert_monotone([lam](double u) { return tl_quantile(u, lam); }, z, 1e-15,
                           1.0 - 1e-15, 1e-14);
}

struct FitSpec {
    int n_params;
    // maps the unconstrained optimizer vector to native parameters
    std::function<Vec(const Vec&)> to_native;
    Vec start;  // unconstrained space
};

double neg_loglik(const MarginalModel& m, const Vec& x) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double l = marginal_logpdf(m, x[i]);
        if (!std::isfinite(l)) return kInf;
        ll += l;
    }
    return -ll;
}

double bounded_exp(double t) { return std::exp(std::clamp(t, -30.0, 30.0)); }

}  // namespace

std::string marginal_family_name(MarginalFamily f) {
    switch (f) {
        case MarginalFamily::Gaussian: return "gaussian";
        case MarginalFamily::StudentT: return "student_t";
        case MarginalFamily::NoncentralT: return "noncentral_t";
        case MarginalFamily::JohnsonSU: return "johnson_su";
        case MarginalFamily::TukeyLambda: return "tukey_lambda";
        case MarginalFamily::Laplace: return "laplace";
        case MarginalFamily::AsymmetricLaplace: return "asymmetric_laplace";
        case MarginalFamily::Empirical: return "empirical";
    }
    return "unknown";
}

MarginalFamily marginal_family_from_name(const std::string& name) {
    for (int f = 0; f <= static_cast<int>(MarginalFamily::Empirical); ++f)
        if (marginal_family_name(static_cast<MarginalFamily>(f)) == name)
            return static_cast<MarginalFamily>(f);
    throw std::invalid_argument("unknown marginal family: " + name);
}

int marginal_param_count(MarginalFamily f) {
    switch (f) {
        case MarginalFamily::Gaussian: return 2;
        case MarginalFamily::StudentT: return 3;
        case MarginalFamily::NoncentralT: return 4;
        case MarginalFamily::JohnsonSU: return 4;
        case MarginalFamily::TukeyLambda: return 3;
        case MarginalFamily::Laplace: return 2;
        case MarginalFamily::AsymmetricLaplace: return 3;
        case MarginalFamily::Empirical: return 0;
    }
    return 0;
}

const std::vector<MarginalFamily>& all_parametric_families() {
    static const std::vector<MarginalFamily> fams = {
        MarginalFamily::Gaussian,     MarginalFamily::StudentT,
        MarginalFamily::NoncentralT,  MarginalFamily::JohnsonSU,
        MarginalFamily::TukeyLambda,  MarginalFamily::Laplace,
        MarginalFamily::AsymmetricLaplace,
    };
    return fams;
}

double marginal_logpdf(const MarginalModel& m, double x) {
    const Vec& p = m.params;
    switch (m.family) {
        case MarginalFamily::Gaussian: {
            const double z = (x - p[0]) / p[1];
            return -0.5 * z * z - std::log(p[1]) - 0.9189385332046727;
        }
        case MarginalFamily::StudentT: {
            const double z = (x - p[0]) / p[1];
            return std::log(student_t_pdf(z, p[2])) - std::log(p[1]);
        }
        case MarginalFamily::NoncentralT: {
            const double z = (x - p[0]) / p[1];
            return nct_logpdf(z, p[2], p[3]) - std::log(p[1]);
        }
        case MarginalFamily::JohnsonSU: {
            const double y = (x - p[2]) / p[3];
            const double z = p[0] + p[1] * std::asinh(y);
            return std::log(p[1]) - std::log(p[3]) - 0.5 * std::log1p(y * y) -
                   0.5 * z * z - 0.9189385332046727;
        }
        case MarginalFamily::TukeyLambda: {
            const double z = (x - p[1]) / p[2];
            const double u = tl_cdf_std(z, p[0]);
            if (u <= 0.0 || u >= 1.0) return -kInf;
            return -std::log(p[2] * tl_quantile_density(u, p[0]));
        }
        case MarginalFamily::Laplace: {
            return -std::fabs(x - p[0]) / p[1] - std::log(2.0 * p[1]);
        }
        case MarginalFamily::AsymmetricLaplace: {
            const double th = p[0], s = p[1], k = p[2];
            const double base = std::log(k) - std::log(s) - std::log1p(k * k);
            if (x >= th) return base - k * (x - th) / s;
            return base + (x - th) / (k * s);
        }
        case MarginalFamily::Empirical:
            throw std::logic_error("no density for empirical marginal");
    }
    return -kInf;
}

double marginal_cdf(const MarginalModel& m, double x) {
    const Vec& p = m.params;
    switch (m.family) {
        case MarginalFamily::Gaussian:
            return normal_cdf((x - p[0]) / p[1]);
        case MarginalFamily::StudentT:
            return student_t_cdf((x - p[0]) / p[1], p[2]);
        case MarginalFamily::NoncentralT:
            return nct_cdf((x - p[0]) / p[1], p[2], p[3]);
        case MarginalFamily::JohnsonSU:
            return normal_cdf(p[0] + p[1] * std::asinh((x - p[2]) / p[3]));
        case MarginalFamily::TukeyLambda:
            return tl_cdf_std((x - p[1]) / p[2], p[0]);
        case MarginalFamily::Laplace: {
            const double z = (x - p[0]) / p[1];
            return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
        }
        case MarginalFamily::AsymmetricLaplace: {
            const double th = p[0], s = p[1], k = p[2];
            const double w = k * k / (1.0 + k * k);
            if (x < th) return w * std::exp((x - th) / (k * s));
            return 1.0 - (1.0 - w) * std::exp(-k * (x - th) / s);
        }
        case MarginalFamily::Empirical: {
            const auto& s = m.sample;
            const std::size_t n = s.size();
            if (x <= s.front()) return 1.0 / (n + 1.0);
            if (x >= s.back()) return n / (n + 1.0);
            const auto it = std::upper_bound(s.begin(), s.end(), x);
            const std::size_t hi = static_cast<std::size_t>(it - s.begin());  // s[hi] > x
            const std::size_t lo = hi - 1;
            const double u_lo = (lo + 1.0) / (n + 1.0), u_hi = (hi + 1.0) / (n + 1.0);
            if (s[hi] == s[lo]) return u_lo;
            return u_lo + (u_hi - u_lo) * (x - s[lo]) / (s[hi] - s[lo]);
        }
    }
    return 0.0;
}

double marginal_ppf(const MarginalModel& m, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("ppf requires u in (0,1)");
    const Vec& p = m.params;
    switch (m.family) {
        case MarginalFamily::Gaussian:
            return p[0] + p[1] * normal_ppf(u);
        case MarginalFamily::StudentT:
            return p[0] + p[1] * student_t_ppf(u, p[2]);
        case MarginalFamily::NoncentralT:
            return p[0] + p[1] * nct_ppf(u, p[2], p[3]);
        case MarginalFamily::JohnsonSU:
            return p[2] + p[3] * std::sinh((normal_ppf(u) - p[0]) / p[1]);
        case MarginalFamily::TukeyLambda:
            return p[1] + p[2] * tl_quantile(u, p[0]);
        case MarginalFamily::Laplace:
            return u < 0.5 ? p[0] + p[1] * std::log(2.0 * u)
                           : p[0] - p[1] * std::log(2.0 * (1.0 - u));
        case MarginalFamily::AsymmetricLaplace: {
            const double th = p[0], s = p[1], k = p[2];
            const double w = k * k / (1.0 + k * k);
            if (u < w) return th + k * s * std::log(u / w);
            return th - (s / k) * std::log((1.0 - u) / (1.0 - w));
        }
        case MarginalFamily::Empirical: {
            const auto& s = m.sample;
            const std::size_t n = s.size();
            const double pos = u * (n + 1.0) - 1.0;  // index of order statistic
            if (pos <= 0.0) return s.front();
            if (pos >= n - 1.0) return s.back();
            const std::size_t lo = static_cast<std::size_t>(pos);
            const double frac = pos - lo;
            return s[lo] + frac * (s[lo + 1] - s[lo]);
        }
    }
    return 0.0;
}

MarginalModel fit_marginal(const Vec& sample, MarginalFamily family) {
    if (sample.size() < 20) throw std::invalid_argument("need at least 20 observations");
    for (Eigen::Index i = 0; i < sample.size(); ++i)
        if (!std::isfinite(sample[i])) throw std::invalid_argument("non-finite observation");
    const double sd = sample_std(sample);
    if (!(sd > 0.0)) throw std::runtime_error("degenerate sample: zero scale");
    const double mu = sample_mean(sample);
    const int n = static_cast<int>(sample.size());

    MarginalModel m;
    m.family = family;
    m.n_obs = n;

    if (family == MarginalFamily::Empirical) {
        m.sample.assign(sample.data(), sample.data() + sample.size());
        std::sort(m.sample.begin(), m.sample.end());
        m.aic = kInf;
        return m;
    }

    if (family == MarginalFamily::Gaussian) {
        m.params = Vec(2);
        m.params << mu, sd;
    } else if (family == MarginalFamily::Laplace) {
        std::vector<double> s(sample.data(), sample.data() + sample.size());
        std::nth_element(s.begin(), s.begin() + s.size() / 2, s.end());
        const double med = s[s.size() / 2];
        m.params = Vec(2);
        m.params << med, (sample.array() - med).abs().mean();
    } else {
        FitSpec spec;
        switch (family) {
            case MarginalFamily::StudentT:
                spec.n_params = 3;
                spec.to_native = [](const Vec& t) {
                    Vec p(3);
                    p << t[0], bounded_exp(t[1]), kNuFloor + bounded_exp(t[2]);
                    return p;
                };
                spec.start = Vec(3);
                spec.start << mu, std::log(sd * 0.9), std::log(6.0);
                break;
            case MarginalFamily::NoncentralT:
                spec.n_params = 4;
                spec.to_native = [](const Vec& t) {
                    Vec p(4);
                    p << t[0], bounded_exp(t[1]), kNuFloor + bounded_exp(t[2]),
                        std::clamp(t[3], -12.0, 12.0);
                    return p;
                };
                spec.start = Vec(4);
                spec.start << mu, std::log(sd * 0.9), std::log(6.0), 0.0;
                break;
            case MarginalFamily::JohnsonSU:
                spec.n_params = 4;
                spec.to_native = [](const Vec& t) {
                    Vec p(4);
                    p << t[0], 0.05 + bounded_exp(t[1]), t[2], bounded_exp(t[3]);
                    return p;
                };
                spec.start = Vec(4);
                spec.start << 0.0, std::log(1.5), mu, std::log(sd);
                break;
            case MarginalFamily::TukeyLambda:
                spec.n_params = 3;
                spec.to_native = [](const Vec& t) {
                    Vec p(3);
                    p << std::clamp(t[0], -2.0, 2.0), t[1], bounded_exp(t[2]);
                    return p;
                };
                spec.start = Vec(3);
                spec.start << 0.14, mu, std::log(sd * 0.55);
                break;
            case MarginalFamily::AsymmetricLaplace:
                spec.n_params = 3;
                spec.to_native = [](const Vec& t) {
                    Vec p(3);
                    p << t[0], bounded_exp(t[1]), bounded_exp(std::clamp(t[2], -4.0, 4.0));
                    return p;
                };
                spec.start = Vec(3);
                spec.start << mu, std::log(sd * 0.7), 0.0;
                break;
            default:
                throw std::logic_error("unhandled family");
        }

        auto objective = [&](const Vec& t) {
            MarginalModel trial;
            trial.family = family;
            trial.params = spec.to_native(t);
            return neg_loglik(trial, sample);
        };
        NelderMeadOptions opt;
        opt.max_evals = family == MarginalFamily::NoncentralT ? 900 : 600;
        opt.xtol = 1e-6;
        NelderMeadResult best = nelder_mead(objective, spec.start, opt);
        if (family == MarginalFamily::TukeyLambda) {
            // the likelihood in lambda has local optima; try a few shapes
            for (double lam0 : {-0.5, 0.6}) {
                Vec s2 = spec.start;
                s2[0] = lam0;
                NelderMeadResult r = nelder_mead(objective, s2, opt);
                if (r.fx < best.fx) best = r;
            }
        }
        if (!std::isfinite(best.fx)) throw std::runtime_error("marginal fit failed to evaluate");
        m.params = spec.to_native(best.x);
        m.converged = best.converged;
    }

    const double nll = neg_loglik(m, sample);
    if (!std::isfinite(nll)) throw std::runtime_error("marginal fit produced invalid likelihood");
    m.aic = 2.0 * marginal_param_count(family) + 2.0 * nll;
    return m;
}

MarginalModel select_marginal(const Vec& sample, const std::vector<MarginalFamily>& families) {
    if (families.empty()) throw std::invalid_argument("empty family set");
    bool have = false;
    MarginalModel best;
    for (MarginalFamily f : families) {
        MarginalModel m;
        try {
            m = fit_marginal(sample, f);
        } catch (const std::exception&) {
            continue;
        }
        if (!have) { best = m; have = true; continue; }
        const double delta = m.aic - best.aic;
        if (delta < 0.0 ||
            (delta == 0.0 && marginal_param_count(m.family) < marginal_param_count(best.family)))
            best = m;
    }
    if (!have) throw std::runtime_error("all marginal fits failed");
    return best;
}

nlohmann::json marginal_to_json(const MarginalModel& m) {
    nlohmann::json j;
    j["family"] = marginal_family_name(m.family);
    j["params"] = std::vector<double>(m.params.data(), m.params.data() + m.params.size());
    j["aic"] = std::isfinite(m.aic) ? m.aic : 0.0;
    j["n_obs"] = m.n_obs;
    j["converged"] = m.converged;
    if (m.family == MarginalFamily::Empirical) j["sample"] = m.sample;
    return j;
}

MarginalModel marginal_from_json(const nlohmann::json& j) {
    MarginalModel m;
    m.family = marginal_family_from_name(j.at("family").get<std::string>());
    const auto pv = j.at("params").get<std::vector<double>>();
    m.params = Eigen::Map<const Vec>(pv.data(), static_cast<Eigen::Index>(pv.size()));
    m.aic = j.at("aic").get<double>();
    m.n_obs = j.at("n_obs").get<int>();
    m.converged = j.value("converged", true);
    if (m.family == MarginalFamily::Empirical) {
        m.sample = j.at("sample").get<std::vector<double>>();
        m.aic = kInf;
    }
    return m;
}

}  // namespace genport
