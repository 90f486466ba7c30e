#include "genport/volatility.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "genport/optim.hpp"
#include "genport/rng.hpp"
#include "genport/special.hpp"

namespace genport {

namespace {

constexpr double kPersistenceCap = 1.0 - 1e-6;

// log density of a unit-variance standardized innovation
double innovation_logpdf(double z, InnovationDist dist, double nu) {
    if (dist == InnovationDist::Gaussian)
        return -0.5 * z * z - 0.9189385332046727;
    const double s = std::sqrt(nu / (nu - 2.0));
    return std::log(student_t_pdf(z * s, nu) * s);
}

double standardized_t_draw(RngStream& rs, double nu) {
    const double z = rs.normal();
    const double w = chi2_ppf(rs.uniform(), nu);
    return z / std::sqrt(w / nu) * std::sqrt((nu - 2.0) / nu);
}

double garch_negll(const Vec& r, double mu, double a0, double a1, double b1,
                   InnovationDist dist, double nu) {
    const Eigen::Index t_len = r.size();
    double var0 = 0.0;
    for (Eigen::Index t = 0; t < t_len; ++t) var0 += (r[t] - mu) * (r[t] - mu);
    var0 /= t_len;
    double h = var0, ll = 0.0;
    double a_prev = 0.0;
    for (Eigen::Index t = 0; t < t_len; ++t) {
        if (t > 0) h = a0 + a1 * a_prev * a_prev + b1 * h;
        if (!(h > 1e-300)) return 1e300;
        const double a = r[t] - mu;
        ll += innovation_logpdf(a / std::sqrt(h), dist, nu) - 0.5 * std::log(h);
        a_prev = a;
    }
    return -ll;
}

Mat correlation_from_q(const Mat& q) {
    const Eigen::Index d = q.rows();
    Vec inv_sd(d);
    for (Eigen::Index i = 0; i < d; ++i) inv_sd[i] = 1.0 / std::sqrt(q(i, i));
    Mat r = q;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) r(i, j) *= inv_sd[i] * inv_sd[j];
    for (Eigen::Index i = 0; i < d; ++i) r(i, i) = 1.0;
    return r;
}

// Gaussian correlation-part quasi-likelihood of the DCC recursion.
double dcc_negll(const Mat& eps, const Mat& qbar, double a, double b) {
    const Eigen::Index t_len = eps.rows(), d = eps.cols();
    Mat q = qbar;
    double ll = 0.0;
    for (Eigen::Index t = 0; t < t_len; ++t) {
        if (t > 0) {
            const Vec e = eps.row(t - 1).transpose();
            q = (1.0 - a - b) * qbar + a * (e * e.transpose()) + b * q;
        }
        const Mat r = correlation_from_q(q);
        Eigen::LLT<Mat> llt(r);
        if (llt.info() != Eigen::Success) return 1e300;
        const Vec et = eps.row(t).transpose();
        const Vec sol = llt.solve(et);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        ll += -0.5 * (logdet + et.dot(sol) - et.dot(et));
    }
    return -ll;
}

}  // namespace

std::string innovation_dist_name(InnovationDist d) {
    return d == InnovationDist::Gaussian ? "gaussian" : "student_t";
}

GarchModel fit_garch11(const Vec& returns, InnovationDist dist) {
    if (returns.size() < 50) throw std::invalid_argument("need at least 50 observations");
    const double mu0 = returns.mean();
    double var0 = (returns.array() - mu0).square().sum() / returns.size();
    if (!(var0 > 0.0)) throw std::runtime_error("degenerate returns: zero variance");

    const int np = dist == InnovationDist::StudentT ? 5 : 4;
    auto to_native = [&](const Vec& t, GarchModel& m) {
        m.mu = t[0];
        const double s = expit(t[2]) * kPersistenceCap;
        const double ratio = expit(t[3]);
        m.alpha0 = std::exp(std::clamp(t[1], -40.0, 10.0));
        m.alpha1 = s * ratio;
        m.beta1 = s * (1.0 - ratio);
        if (np == 5) m.nu = 2.1 + std::exp(std::clamp(t[4], -6.0, 8.0));
    };

    Vec start(np);
    start[0] = mu0;
    start[1] = std::log(var0 * 0.05);
    start[2] = logit(0.95);
    start[3] = logit(0.05 / 0.95);
    if (np == 5) start[4] = std::log(8.0 - 2.1);

    GarchModel work;
    work.dist = dist;
    auto objective = [&](const Vec& t) {
        to_native(t, work);
        return garch_negll(returns, work.mu, work.alpha0, work.alpha1, work.beta1, dist, work.nu);
    };
    NelderMeadOptions opt;
    opt.max_evals = 2500;
    opt.xtol = 1e-8;
    const NelderMeadResult res = nelder_mead(objective, start, opt);

    GarchModel m;
    m.dist = dist;
    to_native(res.x, m);
    m.converged = res.converged && std::isfinite(res.fx);
    m.boundary = m.alpha1 + m.beta1 >= 1.0 - 1e-6;

    const GarchFilterResult f = garch_filter(m, returns);
    m.last_h = f.h[f.h.size() - 1];
    m.last_a = returns[returns.size() - 1] - m.mu;
    return m;
}

GarchFilterResult garch_filter(const GarchModel& model, const Vec& returns) {
    const Eigen::Index t_len = returns.size();
    GarchFilterResult out;
    out.z.resize(t_len);
    out.h.resize(t_len);
    double var0 = (returns.array() - model.mu).square().sum() / t_len;
    if (!(var0 > 0.0)) var0 = model.alpha0 > 0.0 ? model.unconditional_variance() : 1.0;
    double h = var0;
    double a_prev = 0.0;
    for (Eigen::Index t = 0; t < t_len; ++t) {
        if (t > 0) h = model.alpha0 + model.alpha1 * a_prev * a_prev + model.beta1 * h;
        const double a = returns[t] - model.mu;
        out.h[t] = h;
        out.z[t] = a / std::sqrt(h);
        a_prev = a;
    }
    return out;
}

Vec simulate_garch11_path(const GarchModel& model, int t_steps, std::uint64_t seed) {
    const int burn = 200;
    RngStream rs(substream(seed, RngPurpose::Scenario));
    Vec out(t_steps);
    double h = model.unconditional_variance();
    double a_prev = 0.0;
    for (int t = -burn; t < t_steps; ++t) {
        if (t > -burn) h = model.alpha0 + model.alpha1 * a_prev * a_prev + model.beta1 * h;
        const double z = model.dist == InnovationDist::Gaussian
                             ? rs.normal()
                             : standardized_t_draw(rs, model.nu);
        const double a = std::sqrt(h) * z;
        if (t >= 0) out[t] = model.mu + a;
        a_prev = a;
    }
    return out;
}

DccModel fit_dcc11(const Mat& std_residuals, InnovationDist dist) {
    const Eigen::Index t_len = std_residuals.rows(), d = std_residuals.cols();
    if (t_len < 20) throw std::invalid_argument("too few residual rows for DCC fit");

    DccModel m;
    m.dist = dist;
    m.qbar = (std_residuals.transpose() * std_residuals) / static_cast<double>(t_len);
    {
        Eigen::LLT<Mat> llt(m.qbar);
        if (llt.info() != Eigen::Success) {
            m.qbar += 1e-8 * Mat::Identity(d, d);
            m.jittered = true;
        }
    }

    if (d == 1) {
        m.a = 0.0;
        m.b = 0.0;
    } else {
        auto to_ab = [](const Vec& t, double& a, double& b) {
            const double s = expit(t[0]) * kPersistenceCap;
            const double ratio = expit(t[1]);
            a = s * ratio;
            b = s * (1.0 - ratio);
        };
        auto objective = [&](const Vec& t) {
            double a, b;
            to_ab(t, a, b);
            return dcc_negll(std_residuals, m.qbar, a, b);
        };
        Vec start(2);
        start << logit(0.95), logit(0.05 / 0.95);
        NelderMeadOptions opt;
        opt.max_evals = 400;
        opt.xtol = 1e-7;
        const NelderMeadResult res = nelder_mead(objective, start, opt);
        to_ab(res.x, m.a, m.b);
        m.converged = res.converged && std::isfinite(res.fx);
        // the no-dynamics corner is a common optimum on constant-correlation data
        if (dcc_negll(std_residuals, m.qbar, 0.0, 0.0) <= res.fx) {
            m.a = 0.0;
            m.b = 0.0;
        }
    }

    if (dist == InnovationDist::StudentT) {
        // residuals are unit-variance, so the t density must carry the
        // standardized scatter R (nu-2)/nu, not R itself
        const auto rs = dcc_correlation_path(m, std_residuals);
        auto nll_nu = [&](double log_nu) {
            const double nu = 2.1 + std::exp(log_nu);
            const double shrink = (nu - 2.0) / nu;
            double ll = 0.0;
            for (Eigen::Index t = 0; t < t_len; ++t) {
                Eigen::LLT<Mat> llt(rs[t]);
                double logdet = d * std::log(shrink);
                for (Eigen::Index i = 0; i < d; ++i)
                    logdet += 2.0 * std::log(llt.matrixL()(i, i));
                const Vec x = std_residuals.row(t).transpose();
                const double quad = x.dot(llt.solve(x)) / shrink;
                ll += std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
                      0.5 * d * std::log(nu * M_PI) - 0.5 * logdet -
                      0.5 * (nu + d) * std::log1p(quad / nu);
            }
            return -ll;
        };
        const double x = scan_golden_min(nll_nu, std::log(0.5), std::log(300.0), 24, 1e-4);
        m.nu = 2.1 + std::exp(x);
    }

    // roll the recursion through the sample to leave the state at the end
    Mat q = m.qbar;
    for (Eigen::Index t = 1; t < t_len; ++t) {
        const Vec e = std_residuals.row(t - 1).transpose();
        q = (1.0 - m.a - m.b) * m.qbar + m.a * (e * e.transpose()) + m.b * q;
    }
    m.last_q = q;
    m.last_eps = std_residuals.row(t_len - 1).transpose();
    return m;
}

std::vector<Mat> dcc_correlation_path(const DccModel& model, const Mat& std_residuals) {
    const Eigen::Index t_len = std_residuals.rows();
    std::vector<Mat> out;
    out.reserve(t_len);
    Mat q = model.qbar;
    for (Eigen::Index t = 0; t < t_len; ++t) {
        if (t > 0) {
            const Vec e = std_residuals.row(t - 1).transpose();
            q = (1.0 - model.a - model.b) * model.qbar + model.a * (e * e.transpose()) +
                model.b * q;
        }
        out.push_back(correlation_from_q(q));
    }
    return out;
}

Mat simulate_dcc_eps_path(double a, double b, const Mat& qbar, int t_steps,
                          std::uint64_t seed, InnovationDist dist, double nu) {
    const Eigen::Index d = qbar.rows();
    const int burn = 100;
    Mat out(t_steps, d);
    Mat q = qbar;
    Vec e_prev = Vec::Zero(d);
    bool have_prev = false;
    for (int t = -burn; t < t_steps; ++t) {
        if (have_prev)
            q = (1.0 - a - b) * qbar + a * (e_prev * e_prev.transpose()) + b * q;
        const Mat r = correlation_from_q(q);
        Eigen::LLT<Mat> llt(r);
        RngStream rs(substream(seed, RngPurpose::Scenario,
                               static_cast<std::uint64_t>(t + burn)));
        Vec z(d);
        if (dist == InnovationDist::Gaussian) {
            for (Eigen::Index i = 0; i < d; ++i) z[i] = rs.normal();
        } else {
            const double w = chi2_ppf(rs.uniform(), nu);
            const double scale = std::sqrt((nu - 2.0) / nu) / std::sqrt(w / nu);
            for (Eigen::Index i = 0; i < d; ++i) z[i] = rs.normal() * scale;
        }
        const Vec e = llt.matrixL() * z;
        if (t >= 0) out.row(t) = e.transpose();
        e_prev = e;
        have_prev = true;
    }
    return out;
}

Mat simulate_dcc(const DccModel& model, int n, std::uint64_t seed) {
    const Eigen::Index d = model.qbar.rows();
    if (model.garch.size() != static_cast<std::size_t>(d) || model.mu.size() != d)
        throw std::logic_error("DCC model lacks garch state for simulation");
    if (model.last_q.size() == 0 || model.last_eps.size() != d)
        throw std::logic_error("DCC model lacks recursion state");

    Vec h_next(d);
    for (Eigen::Index i = 0; i < d; ++i) h_next[i] = model.garch[i].forecast_variance();
    Mat q_next = (1.0 - model.a - model.b) * model.qbar +
                 model.a * (model.last_eps * model.last_eps.transpose()) + model.b * model.last_q;
    Mat r_next = correlation_from_q(q_next);
    Eigen::LLT<Mat> llt(r_next);
    if (llt.info() != Eigen::Success) {
        r_next += 1e-8 * Mat::Identity(d, d);
        llt.compute(r_next);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("forecast correlation not positive definite");
    }
    const Mat l = llt.matrixL();

    Mat out(n, d);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(seed, RngPurpose::Scenario, static_cast<std::uint64_t>(i)));
        Vec z(d);
        if (model.dist == InnovationDist::Gaussian) {
            for (Eigen::Index k = 0; k < d; ++k) z[k] = rs.normal();
        } else {
            const double w = chi2_ppf(rs.uniform(), model.nu);
            const double scale = std::sqrt((model.nu - 2.0) / model.nu) / std::sqrt(w / model.nu);
            for (Eigen::Index k = 0; k < d; ++k) z[k] = rs.normal() * scale;
        }
        const Vec eps = l * z;
        for (Eigen::Index k = 0; k < d; ++k)
            out(i, k) = model.mu[k] + std::sqrt(h_next[k]) * eps[k];
    }
    return out;
}

nlohmann::json garch_to_json(const GarchModel& m) {
    return nlohmann::json{{"mu", m.mu},         {"alpha0", m.alpha0},
                          {"alpha1", m.alpha1}, {"beta1", m.beta1},
                          {"dist", innovation_dist_name(m.dist)},
                          {"nu", m.nu},         {"last_h", m.last_h},
                          {"last_a", m.last_a}, {"converged", m.converged},
                          {"boundary", m.boundary}};
}

GarchModel garch_from_json(const nlohmann::json& j) {
    GarchModel m;
    m.mu = j.at("mu");
    m.alpha0 = j.at("alpha0");
    m.alpha1 = j.at("alpha1");
    m.beta1 = j.at("beta1");
    m.dist = j.at("dist") == "student_t" ? InnovationDist::StudentT : InnovationDist::Gaussian;
    m.nu = j.at("nu");
    m.last_h = j.at("last_h");
    m.last_a = j.at("last_a");
    m.converged = j.value("converged", true);
    m.boundary = j.value("boundary", false);
    return m;
}

namespace {

nlohmann::json mat_to_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    return m;
}

}  // namespace

nlohmann::json dcc_to_json(const DccModel& m) {
    nlohmann::json j;
    j["a"] = m.a;
    j["b"] = m.b;
    j["qbar"] = mat_to_json(m.qbar);
    j["last_q"] = mat_to_json(m.last_q);
    j["last_eps"] = std::vector<double>(m.last_eps.data(), m.last_eps.data() + m.last_eps.size());
    j["dist"] = innovation_dist_name(m.dist);
    j["nu"] = m.nu;
    j["mu"] = std::vector<double>(m.mu.data(), m.mu.data() + m.mu.size());
    nlohmann::json garch = nlohmann::json::array();
    for (const auto& g : m.garch) garch.push_back(garch_to_json(g));
    j["garch"] = garch;
    return j;
}

DccModel dcc_from_json(const nlohmann::json& j) {
    DccModel m;
    m.a = j.at("a");
    m.b = j.at("b");
    m.qbar = mat_from_json(j.at("qbar"));
    m.last_q = mat_from_json(j.at("last_q"));
    const auto le = j.at("last_eps").get<std::vector<double>>();
    m.last_eps = Eigen::Map<const Vec>(le.data(), static_cast<Eigen::Index>(le.size()));
    m.dist = j.at("dist") == "student_t" ? InnovationDist::StudentT : InnovationDist::Gaussian;
    m.nu = j.at("nu");
    const auto muv = j.at("mu").get<std::vector<double>>();
    m.mu = Eigen::Map<const Vec>(muv.data(), static_cast<Eigen::Index>(muv.size()));
    for (const auto& g : j.at("garch")) m.garch.push_back(garch_from_json(g));
    return m;
}

}  // namespace genport
