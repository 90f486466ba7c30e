#include "genport/bandit.hpp"

#include <cmath>
#include <stdexcept>

#include "genport/special.hpp"

namespace genport {

namespace {

constexpr double kClamp = 1e-6;     // simplex interior for Dirichlet/Beta likelihoods
constexpr double kGradeArg = 1e-12;  // keeps logit/probit grades finite at |s| = 1

Vec decay_weights(Eigen::Index rows, double gamma) {
    // most recent row (last) gets gamma^0
    Vec w(rows);
    for (Eigen::Index t = 0; t < rows; ++t)
        w[t] = std::pow(gamma, static_cast<double>(rows - 1 - t));
    return w;
}

Mat clamped_rows(const Mat& pi) {
    Mat out = pi.cwiseMax(kClamp).cwiseMin(1.0 - kClamp);
    for (Eigen::Index t = 0; t < out.rows(); ++t) out.row(t) /= out.row(t).sum();
    return out;
}

}  // namespace

std::string similarity_label(SimilarityKind k) {
    switch (k) {
        case SimilarityKind::Cosine: return "cosine";
        case SimilarityKind::Zscore: return "ndtr";
        case SimilarityKind::L1: return "L1";
        case SimilarityKind::L2: return "L2";
        case SimilarityKind::Linf: return "Linf";
    }
    return "unknown";
}

SimilarityKind similarity_from_label(const std::string& s) {
    if (s == "cosine") return SimilarityKind::Cosine;
    if (s == "ndtr") return SimilarityKind::Zscore;
    if (s == "L1") return SimilarityKind::L1;
    if (s == "L2") return SimilarityKind::L2;
    if (s == "Linf") return SimilarityKind::Linf;
    throw std::invalid_argument("unknown similarity: " + s);
}

std::string activation_label(ActivationKind k) {
    switch (k) {
        case ActivationKind::Maxout: return "maxout";
        case ActivationKind::Softmax: return "softmax";
        case ActivationKind::Logistic: return "logistic";
        case ActivationKind::Tanh: return "tanh";
        case ActivationKind::LeakyRelu: return "leaky relu";
        case ActivationKind::Logit: return "logit";
        case ActivationKind::Probit: return "probit";
    }
    return "unknown";
}

ActivationKind activation_from_label(const std::string& s) {
    if (s == "maxout") return ActivationKind::Maxout;
    if (s == "softmax") return ActivationKind::Softmax;
    if (s == "logistic") return ActivationKind::Logistic;
    if (s == "tanh") return ActivationKind::Tanh;
    if (s == "leaky relu") return ActivationKind::LeakyRelu;
    if (s == "logit") return ActivationKind::Logit;
    if (s == "probit") return ActivationKind::Probit;
    throw std::invalid_argument("unknown activation: " + s);
}

std::string policy_label(PolicyKind k) { return k == PolicyKind::Blend ? "blend" : "switch"; }

PolicyKind policy_from_label(const std::string& s) {
    if (s == "blend") return PolicyKind::Blend;
    if (s == "switch") return PolicyKind::Switch;
    throw std::invalid_argument("unknown policy: " + s);
}

double similarity(SimilarityKind kind, const Vec& w0, const Vec& realized, bool* degenerate) {
    if (degenerate) *degenerate = false;
    const double rn1 = realized.cwiseAbs().sum();
    if (rn1 == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    switch (kind) {
        case SimilarityKind::Cosine: {
            const double wn = w0.norm(), rn = realized.norm();
            if (wn == 0.0) {
                if (degenerate) *degenerate = true;
                return 0.0;
            }
            return w0.dot(realized) / (wn * rn);
        }
        case SimilarityKind::Zscore:
            return 2.0 * normal_cdf(w0.dot(realized)) - 1.0;
        case SimilarityKind::L1:
        case SimilarityKind::L2:
        case SimilarityKind::Linf: {
            const double wn1 = w0.cwiseAbs().sum();
            if (wn1 == 0.0) {
                if (degenerate) *degenerate = true;
                return 0.0;
            }
            const Vec d = w0 / wn1 - realized / rn1;
            double nd;
            if (kind == SimilarityKind::L1) nd = d.cwiseAbs().sum();
            else if (kind == SimilarityKind::L2) nd = d.norm();
            else nd = d.cwiseAbs().maxCoeff();
            return 1.0 - nd;
        }
    }
    return 0.0;
}

Vec optimality(ActivationKind kind, const Vec& s, bool leaky_relu_verbatim,
               bool* uniform_fallback) {
    const Eigen::Index p = s.size();
    if (uniform_fallback) *uniform_fallback = false;
    Vec g(p);

    if (kind == ActivationKind::Maxout) {
        const double top = s.maxCoeff();
        for (Eigen::Index i = 0; i < p; ++i) g[i] = s[i] == top ? 1.0 : 0.0;
    } else {
        for (Eigen::Index i = 0; i < p; ++i) {
            const double si = s[i];
            switch (kind) {
                case ActivationKind::Softmax: g[i] = std::exp(7.0 * si); break;
                case ActivationKind::Logistic: g[i] = expit(7.0 * si); break;
                case ActivationKind::Tanh: g[i] = 1.0 + std::tanh(7.0 * si); break;
                case ActivationKind::LeakyRelu:
                    g[i] = leaky_relu_verbatim ? 1.0 / 7.0 + 7.0 * std::fabs(si)
                                               : std::max(0.0, si >= 0.0 ? 7.0 * si : si);
                    break;
                case ActivationKind::Logit: {
                    const double q = std::clamp(0.5 * (1.0 + si), kGradeArg, 1.0 - kGradeArg);
                    g[i] = std::max(0.0, logit(q));
                    break;
                }
                case ActivationKind::Probit: {
                    const double q = std::clamp(0.5 * (1.0 + si), kGradeArg, 1.0 - kGradeArg);
                    g[i] = std::max(0.0, normal_ppf(q));
                    break;
                }
                default: break;
            }
        }
    }

    const double total = g.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        if (uniform_fallback) *uniform_fallback = true;
        return Vec::Constant(p, 1.0 / p);
    }
    return g / total;
}

Vec wmle_categorical(const OptimalityHistory& history, double gamma) {
    const Eigen::Index rows = history.pi.rows(), p = history.pi.cols();
    if (rows < 1) throw std::invalid_argument("empty optimality history");
    const Vec w = decay_weights(rows, gamma);
    Vec theta = Vec::Zero(p);
    for (Eigen::Index t = 0; t < rows; ++t) theta += w[t] * history.pi.row(t).transpose();
    const double total = theta.sum();
    if (!(total > 0.0)) return Vec::Constant(p, 1.0 / p);
    return theta / total;
}

double categorical_weighted_loglik(const OptimalityHistory& history, double gamma,
                                   const Vec& theta) {
    const Vec w = decay_weights(history.pi.rows(), gamma);
    double ll = 0.0;
    for (Eigen::Index t = 0; t < history.pi.rows(); ++t)
        for (Eigen::Index p = 0; p < history.pi.cols(); ++p)
            ll += w[t] * history.pi(t, p) * std::log(std::max(theta[p], 1e-300));
    return ll;
}

double dirichlet_weighted_loglik(const OptimalityHistory& history, double gamma,
                                 const Vec& theta) {
    const Mat pi = clamped_rows(history.pi);
    const Vec w = decay_weights(pi.rows(), gamma);
    const double s = theta.sum();
    double lgnorm = std::lgamma(s);
    for (Eigen::Index p = 0; p < theta.size(); ++p) lgnorm -= std::lgamma(theta[p]);
    double ll = 0.0;
    for (Eigen::Index t = 0; t < pi.rows(); ++t) {
        double row = lgnorm;
        for (Eigen::Index p = 0; p < theta.size(); ++p)
            row += (theta[p] - 1.0) * std::log(pi(t, p));
        ll += w[t] * row;
    }
    return ll;
}

Vec wmle_dirichlet(const OptimalityHistory& history, double gamma, bool* fallback) {
    const Mat pi = clamped_rows(history.pi);
    const Eigen::Index rows = pi.rows(), p = pi.cols();
    if (rows < 1) throw std::invalid_argument("empty optimality history");
    if (fallback) *fallback = false;

    const Vec w = decay_weights(rows, gamma);
    const double wsum = w.sum();

    // weighted sufficient statistics
    Vec logbar = Vec::Zero(p), mean = Vec::Zero(p);
    for (Eigen::Index t = 0; t < rows; ++t) {
        logbar += w[t] * pi.row(t).transpose().array().log().matrix();
        mean += w[t] * pi.row(t).transpose();
    }
    logbar /= wsum;
    mean /= wsum;

    // moment-matching start then Minka fixed point
    double var0 = 0.0;
    for (Eigen::Index t = 0; t < rows; ++t)
        var0 += w[t] * std::pow(pi(t, 0) - mean[0], 2.0);
    var0 /= wsum;
    double conc = var0 > 1e-12 ? std::max(mean[0] * (1.0 - mean[0]) / var0 - 1.0, 1e-2)
                               : static_cast<double>(p);
    Vec theta = (mean * conc).cwiseMax(1e-4);

    bool converged = false;
    for (int it = 0; it < 500; ++it) {
        const double psi_sum = digamma(theta.sum());
        Vec next(p);
        for (Eigen::Index k = 0; k < p; ++k)
            next[k] = digamma_inv(psi_sum + logbar[k]);
        const double delta = (next - theta).cwiseAbs().maxCoeff();
        theta = next.cwiseMax(1e-8);
        if (delta < 1e-12) { converged = true; break; }
    }

    // Newton polish on the gradient via the Sherman-Morrison structure
    for (int it = 0; it < 50; ++it) {
        const double s = theta.sum();
        Vec grad(p), qdiag(p);
        for (Eigen::Index k = 0; k < p; ++k) {
            grad[k] = wsum * (digamma(s) - digamma(theta[k])) + wsum * logbar[k];
            qdiag[k] = -wsum * trigamma(theta[k]);
        }
        const double z = wsum * trigamma(s);
        // H = Q + z 11'; solve H dx = -grad
        double binv_sum = 0.0, gb_sum = 0.0;
        for (Eigen::Index k = 0; k < p; ++k) {
            binv_sum += 1.0 / qdiag[k];
            gb_sum += grad[k] / qdiag[k];
        }
        const double corr = gb_sum * z / (1.0 + z * binv_sum);
        Vec dx(p);
        for (Eigen::Index k = 0; k < p; ++k) dx[k] = -(grad[k] - corr) / qdiag[k];
        if (grad.cwiseAbs().maxCoeff() < 1e-9 * std::max(wsum, 1.0)) { converged = true; break; }
        double step = 1.0;
        Vec cand = theta + dx;
        while (cand.minCoeff() <= 0.0 && step > 1e-8) {
            step *= 0.5;
            cand = theta + step * dx;
        }
        if (cand.minCoeff() <= 0.0) break;  // line search failed, keep current point
        theta = cand;
    }

    double grad_inf = 0.0;
    {
        const double s = theta.sum();
        for (Eigen::Index k = 0; k < p; ++k)
            grad_inf = std::max(grad_inf, std::fabs(wsum * (digamma(s) - digamma(theta[k])) +
                                                    wsum * logbar[k]));
    }
    if (!converged && grad_inf > 1e-6) {
        if (fallback) *fallback = true;
        return (mean * conc).cwiseMax(1e-4);  // method of moments
    }
    return theta;
}

double wmle_bernoulli(const Vec& series, double gamma) {
    if (series.size() < 1) throw std::invalid_argument("empty series");
    const Vec w = decay_weights(series.size(), gamma);
    return w.dot(series) / w.sum();
}

double bernoulli_weighted_loglik(const Vec& series, double gamma, double theta) {
    const Vec w = decay_weights(series.size(), gamma);
    const double th = std::clamp(theta, 1e-12, 1.0 - 1e-12);
    double ll = 0.0;
    for (Eigen::Index t = 0; t < series.size(); ++t)
        ll += w[t] * (series[t] * std::log(th) + (1.0 - series[t]) * std::log1p(-th));
    return ll;
}

double beta_weighted_loglik(const Vec& series, double gamma, double theta, double nu) {
    const Vec w = decay_weights(series.size(), gamma);
    const double a = theta * nu, b = nu - theta * nu;
    double ll = 0.0;
    for (Eigen::Index t = 0; t < series.size(); ++t) {
        const double x = std::clamp(series[t], kClamp, 1.0 - kClamp);
        ll += w[t] * ((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
    }
    return ll;
}

BetaFit wmle_beta(const Vec& series, double gamma) {
    if (series.size() < 1) throw std::invalid_argument("empty series");
    BetaFit fit;
    const Vec w = decay_weights(series.size(), gamma);
    const double wsum = w.sum();

    Vec x(series.size());
    for (Eigen::Index t = 0; t < series.size(); ++t)
        x[t] = std::clamp(series[t], kClamp, 1.0 - kClamp);

    double mean = w.dot(x) / wsum;
    double var = 0.0;
    double s_log = 0.0, s_log1m = 0.0;
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        var += w[t] * (x[t] - mean) * (x[t] - mean);
        s_log += w[t] * std::log(x[t]);
        s_log1m += w[t] * std::log1p(-x[t]);
    }
    var /= wsum;

    if (var < 1e-14) {
        // effectively constant series: mean pins theta, concentration runs off
        fit.theta = mean;
        fit.nu = 1e6;
        return fit;
    }

    fit.theta = mean;
    fit.nu = std::clamp(mean * (1.0 - mean) / var - 1.0, 1e-3, 1e6);

    // Newton on (theta, nu)
    bool ok = false;
    for (int it = 0; it < 200; ++it) {
        const double a = fit.theta * fit.nu, b = fit.nu - a;
        const double psi_a = digamma(a), psi_b = digamma(b), psi_nu = digamma(fit.nu);
        const double tri_a = trigamma(a), tri_b = trigamma(b), tri_nu = trigamma(fit.nu);

        const double g_theta = fit.nu * (s_log - s_log1m) - wsum * fit.nu * (psi_a - psi_b);
        const double g_nu = fit.theta * s_log + (1.0 - fit.theta) * s_log1m -
                            wsum * (fit.theta * psi_a + (1.0 - fit.theta) * psi_b - psi_nu);

        const double h_tt = -wsum * fit.nu * fit.nu * (tri_a + tri_b);
        const double h_tn = (s_log - s_log1m) - wsum * (psi_a - psi_b) -
                            wsum * fit.nu * (fit.theta * tri_a - (1.0 - fit.theta) * tri_b);
        const double h_nn = -wsum * (fit.theta * fit.theta * tri_a +
                                     (1.0 - fit.theta) * (1.0 - fit.theta) * tri_b - tri_nu);

        const double det = h_tt * h_nn - h_tn * h_tn;
        if (std::fabs(det) < 1e-30) break;
        double d_theta = -(h_nn * g_theta - h_tn * g_nu) / det;
        double d_nu = -(-h_tn * g_theta + h_tt * g_nu) / det;

        double step = 1.0;
        double nt = fit.theta + d_theta, nn = fit.nu + d_nu;
        while ((nt <= 1e-9 || nt >= 1.0 - 1e-9 || nn <= 1e-6 || nn > 1e7) && step > 1e-10) {
            step *= 0.5;
            nt = fit.theta + step * d_theta;
            nn = fit.nu + step * d_nu;
        }
        if (nt <= 1e-9 || nt >= 1.0 - 1e-9 || nn <= 1e-6) break;  // keep current point
        fit.theta = nt;
        fit.nu = std::min(nn, 1e6);
        if (std::fabs(g_theta) < 1e-9 * std::max(wsum, 1.0) &&
            std::fabs(g_nu) < 1e-9 * std::max(wsum, 1.0)) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        const double a = fit.theta * fit.nu, b = fit.nu - a;
        const double g_theta = fit.nu * (s_log - s_log1m) -
                               wsum * fit.nu * (digamma(a) - digamma(b));
        if (std::fabs(g_theta) > 1e-5) {
            fit.theta = mean;
            fit.nu = std::clamp(mean * (1.0 - mean) / var - 1.0, 1e-3, 1e6);
            fit.fallback = true;
        }
    }
    fit.theta = std::clamp(fit.theta, std::max(1e-9, x.minCoeff()), std::min(1.0 - 1e-9, x.maxCoeff()));
    return fit;
}

Vec policy_ratio(const Vec& theta, PolicyKind policy) {
    const Eigen::Index p = theta.size();
    if (policy == PolicyKind::Blend) {
        const double s = theta.sum();
        if (!(s > 0.0)) return Vec::Constant(p, 1.0 / p);
        return theta / s;
    }
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < p; ++i)
        if (theta[i] > theta[best]) best = i;
    Vec psi = Vec::Zero(p);
    psi[best] = 1.0;
    return psi;
}

Vec eclectic_weights(const Vec& psi, const std::vector<Vec>& arm_weights) {
    if (psi.size() != static_cast<Eigen::Index>(arm_weights.size()))
        throw std::invalid_argument("psi/arms size mismatch");
    if (arm_weights.empty()) throw std::invalid_argument("no arms");
    Vec w = Vec::Zero(arm_weights[0].size());
    for (Eigen::Index p = 0; p < psi.size(); ++p) w += psi[p] * arm_weights[p];
    return w;
}

}  // namespace genport
