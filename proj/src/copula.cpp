#include "genport/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "genport/kernels.hpp"
#include "genport/optim.hpp"
#include "genport/rng.hpp"
#include "genport/special.hpp"

namespace genport {

namespace {

constexpr double kEps = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_u(double u) { return std::clamp(u, kEps, 1.0 - kEps); }

// ---- base (unrotated) family functions -----------------------------------

double base_logpdf(BicopFamily f, const Vec& p, double u, double v) {
    switch (f) {
        case BicopFamily::Independence:
            return 0.0;
        case BicopFamily::Gaussian: {
            const double r = p[0];
            const double x = normal_ppf(u), y = normal_ppf(v);
            const double om = 1.0 - r * r;
            return -0.5 * std::log(om) -
                   (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * om);
        }
        case BicopFamily::StudentT: {
            const double r = p[0], nu = p[1];
            const double x = student_t_ppf(u, nu), y = student_t_ppf(v, nu);
            const double om = 1.0 - r * r;
            const double q = (x * x - 2.0 * r * x * y + y * y) / (nu * om);
            return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                   2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(om) -
                   0.5 * (nu + 2.0) * std::log1p(q) +
                   0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
        }
        case BicopFamily::Clayton: {
            const double th = p[0];
            const double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
            return std::log1p(th) - (1.0 + th) * (std::log(u) + std::log(v)) -
                   (2.0 + 1.0 / th) * std::log(s);
        }
        case BicopFamily::Gumbel: {
            const double th = p[0];
            const double x = -std::log(u), y = -std::log(v);
            const double s = std::pow(x, th) + std::pow(y, th);
            const double s1t = std::pow(s, 1.0 / th);
            return -s1t + x + y + (th - 1.0) * (std::log(x) + std::log(y)) +
                   (1.0 / th - 2.0) * std::log(s) + std::log(s1t + th - 1.0);
        }
        case BicopFamily::Frank: {
            const double th = p[0];
            if (std::fabs(th) < 1e-8) return 0.0;
            const double e = std::expm1(-th);
            const double a = std::expm1(-th * u), b = std::expm1(-th * v);
            return std::log(std::fabs(th)) + std::log(std::fabs(e)) - th * (u + v) -
                   2.0 * std::log(std::fabs(e + a * b));
        }
        case BicopFamily::Joe: {
            const double th = p[0];
            const double xb = 1.0 - u, yb = 1.0 - v;
            const double xt = std::pow(xb, th), yt = std::pow(yb, th);
            const double t = xt + yt - xt * yt;
            return (1.0 / th - 2.0) * std::log(t) +
                   (th - 1.0) * (std::log(xb) + std::log(yb)) + std::log(th - 1.0 + t);
        }
    }
    return -kInf;
}

double base_cdf(BicopFamily f, const Vec& p, double u, double v) {
    switch (f) {
        case BicopFamily::Independence:
            return u * v;
        case BicopFamily::Clayton: {
            const double th = p[0];
            const double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
            return s <= 0.0 ? 0.0 : std::pow(s, -1.0 / th);
        }
        case BicopFamily::Gumbel: {
            const double th = p[0];
            const double x = -std::log(u), y = -std::log(v);
            return std::exp(-std::pow(std::pow(x, th) + std::pow(y, th), 1.0 / th));
        }
        case BicopFamily::Frank: {
            const double th = p[0];
            if (std::fabs(th) < 1e-8) return u * v;
            const double e = std::expm1(-th);
            const double a = std::expm1(-th * u), b = std::expm1(-th * v);
            return -std::log1p(a * b / e) / th;
        }
        case BicopFamily::Joe: {
            const double th = p[0];
            const double xt = std::pow(1.0 - u, th), yt = std::pow(1.0 - v, th);
            return 1.0 - std::pow(xt + yt - xt * yt, 1.0 / th);
        }
        default:
            break;
    }
    // elliptical families: integrate the h-function, C(u,v) = int_0^v h2(u|t) dt
    double acc = 0.0;
    const int n_nodes = 64;
    for (int k = 0; k < n_nodes; ++k) {
        const double t = v * (k + 0.5) / n_nodes;
        // h2 with base family
        const double x = f == BicopFamily::Gaussian ? normal_ppf(u) : student_t_ppf(u, p[1]);
        const double y = f == BicopFamily::Gaussian ? normal_ppf(clamp_u(t))
                                                    : student_t_ppf(clamp_u(t), p[1]);
        const double r = p[0];
        double h;
        if (f == BicopFamily::Gaussian) {
            h = normal_cdf((x - r * y) / std::sqrt(1.0 - r * r));
        } else {
            const double nu = p[1];
            const double s = std::sqrt((nu + y * y) * (1.0 - r * r) / (nu + 1.0));
            h = student_t_cdf((x - r * y) / s, nu + 1.0);
        }
        acc += h * (v / n_nodes);
    }
    return acc;
}

// P(U <= u | V = v), base family
double base_h2(BicopFamily f, const Vec& p, double u, double v) {
    switch (f) {
        case BicopFamily::Independence:
            return u;
        case BicopFamily::Gaussian: {
            const double r = p[0];
            const double x = normal_ppf(u), y = normal_ppf(v);
            return normal_cdf((x - r * y) / std::sqrt(1.0 - r * r));
        }
        case BicopFamily::StudentT: {
            const double r = p[0], nu = p[1];
            const double x = student_t_ppf(u, nu), y = student_t_ppf(v, nu);
            const double s = std::sqrt((nu + y * y) * (1.0 - r * r) / (nu + 1.0));
            return student_t_cdf((x - r * y) / s, nu + 1.0);
        }
        case BicopFamily::Clayton: {
            const double th = p[0];
            const double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
            return std::pow(v, -th - 1.0) * std::pow(s, -1.0 - 1.0 / th);
        }
        case BicopFamily::Gumbel: {
            const double th = p[0];
            const double x = -std::log(u), y = -std::log(v);
            const double s = std::pow(x, th) + std::pow(y, th);
            return std::exp(-std::pow(s, 1.0 / th)) * std::pow(s, 1.0 / th - 1.0) *
                   std::pow(y, th - 1.0) / v;
        }
        case BicopFamily::Frank: {
            const double th = p[0];
            if (std::fabs(th) < 1e-8) return u;
            const double e = std::expm1(-th);
            const double a = std::expm1(-th * u), b = std::expm1(-th * v);
            return std::exp(-th * v) * a / (e + a * b);
        }
        case BicopFamily::Joe: {
            const double th = p[0];
            const double xt = std::pow(1.0 - u, th), yt = std::pow(1.0 - v, th);
            const double t = xt + yt - xt * yt;
            return std::pow(t, 1.0 / th - 1.0) * std::pow(1.0 - v, th - 1.0) * (1.0 - xt);
        }
    }
    return u;
}

double base_hinv2(BicopFamily f, const Vec& p, double pr, double v) {
    switch (f) {
        case BicopFamily::Independence:
            return pr;
        case BicopFamily::Gaussian: {
            const double r = p[0];
            const double y = normal_ppf(v);
            return normal_cdf(normal_ppf(pr) * std::sqrt(1.0 - r * r) + r * y);
        }
        case BicopFamily::StudentT: {
            const double r = p[0], nu = p[1];
            const double y = student_t_ppf(v, nu);
            const double s = std::sqrt((nu + y * y) * (1.0 - r * r) / (nu + 1.0));
            return student_t_cdf(student_t_ppf(pr, nu + 1.0) * s + r * y, nu);
        }
        case BicopFamily::Clayton: {
            const double th = p[0];
            const double s = std::pow(pr * std::pow(v, th + 1.0), -th / (th + 1.0)) -
                             std::pow(v, -th) + 1.0;
            return std::pow(std::max(s, kEps), -1.0 / th);
        }
        case BicopFamily::Frank: {
            const double th = p[0];
            if (std::fabs(th) < 1e-8) return pr;
            const double e = std::expm1(-th);
            const double b = std::expm1(-th * v);
            const double a = pr * e / (1.0 + b - pr * b);
            return -std::log1p(a) / th;
        }
        default:
            // Gumbel / Joe: bisection on the monotone conditional CDF
            return invert_monotone([&](double uu) { return base_h2(f, p, uu, v); }, pr, kEps,
                                   1.0 - kEps, 1e-14, 80);
    }
}

// Maps rotated arguments to base arguments. deg90:(1-u, v), deg180:(1-u, 1-v),
// deg270:(u, 1-v); densities carry over directly, h-functions pick up
// complements as worked out from the rotated CDF.
struct RotatedArgs {
    double u, v;
};

RotatedArgs rotate_args(Rotation rot, double u, double v) {
    switch (rot) {
        case Rotation::R0: return {u, v};
        case Rotation::R90: return {1.0 - u, v};
        case Rotation::R180: return {1.0 - u, 1.0 - v};
        case Rotation::R270: return {u, 1.0 - v};
    }
    return {u, v};
}

}  // namespace

std::string bicop_family_name(BicopFamily f) {
    switch (f) {
        case BicopFamily::Independence: return "independence";
        case BicopFamily::Gaussian: return "gaussian";
        case BicopFamily::StudentT: return "student_t";
        case BicopFamily::Clayton: return "clayton";
        case BicopFamily::Gumbel: return "gumbel";
        case BicopFamily::Frank: return "frank";
        case BicopFamily::Joe: return "joe";
    }
    return "unknown";
}

BicopFamilySet BicopFamilySet::elliptical() {
    return {{BicopFamily::Gaussian, BicopFamily::StudentT}, true};
}

BicopFamilySet BicopFamilySet::archimedean(bool include_joe) {
    BicopFamilySet s;
    s.families = {BicopFamily::Clayton, BicopFamily::Gumbel, BicopFamily::Frank};
    if (include_joe) s.families.push_back(BicopFamily::Joe);
    s.include_joe = include_joe;
    return s;
}

BicopFamilySet BicopFamilySet::allfam(bool include_joe) {
    BicopFamilySet s = elliptical();
    const BicopFamilySet arch = archimedean(include_joe);
    s.families.insert(s.families.end(), arch.families.begin(), arch.families.end());
    s.include_joe = include_joe;
    return s;
}

BicopFamilySet BicopFamilySet::from_name(const std::string& preset) {
    if (preset == "elliptical") return elliptical();
    if (preset == "archimedean") return archimedean();
    if (preset == "allfam") return allfam();
    throw std::invalid_argument("unknown bicop family preset: " + preset);
}

double bicop_logpdf(const BicopModel& m, double u, double v) {
    const auto a = rotate_args(m.rotation, clamp_u(u), clamp_u(v));
    return base_logpdf(m.family, m.params, a.u, a.v);
}

double bicop_cdf(const BicopModel& m, double u, double v) {
    u = clamp_u(u);
    v = clamp_u(v);
    const auto a = rotate_args(m.rotation, u, v);
    const double c = base_cdf(m.family, m.params, a.u, a.v);
    switch (m.rotation) {
        case Rotation::R0: return c;
        case Rotation::R90: return v - c;
        case Rotation::R180: return u + v - 1.0 + c;
        case Rotation::R270: return u - c;
    }
    return c;
}

double bicop_hfunc2(const BicopModel& m, double u, double v) {
    u = clamp_u(u);
    v = clamp_u(v);
    double h = u;
    switch (m.rotation) {
        case Rotation::R0: h = base_h2(m.family, m.params, u, v); break;
        case Rotation::R90: h = 1.0 - base_h2(m.family, m.params, 1.0 - u, v); break;
        case Rotation::R180: h = 1.0 - base_h2(m.family, m.params, 1.0 - u, 1.0 - v); break;
        case Rotation::R270: h = base_h2(m.family, m.params, u, 1.0 - v); break;
    }
    return std::clamp(h, kEps, 1.0 - kEps);
}

double bicop_hfunc1(const BicopModel& m, double u, double v) {
    // P(V <= v | U = u) equals hfunc2 on the transposed copula; rotations
    // 90 and 270 swap roles under transposition.
    BicopModel t = m;
    if (m.rotation == Rotation::R90) t.rotation = Rotation::R270;
    else if (m.rotation == Rotation::R270) t.rotation = Rotation::R90;
    return bicop_hfunc2(t, v, u);
}

double bicop_hinv2(const BicopModel& m, double p, double v) {
    p = clamp_u(p);
    v = clamp_u(v);
    double u = p;
    switch (m.rotation) {
        case Rotation::R0: u = base_hinv2(m.family, m.params, p, v); break;
        case Rotation::R90: u = 1.0 - base_hinv2(m.family, m.params, 1.0 - p, v); break;
        case Rotation::R180: u = 1.0 - base_hinv2(m.family, m.params, 1.0 - p, 1.0 - v); break;
        case Rotation::R270: u = base_hinv2(m.family, m.params, p, 1.0 - v); break;
    }
    return std::clamp(u, kEps, 1.0 - kEps);
}

double bicop_hinv1(const BicopModel& m, double p, double u) {
    BicopModel t = m;
    if (m.rotation == Rotation::R90) t.rotation = Rotation::R270;
    else if (m.rotation == Rotation::R270) t.rotation = Rotation::R90;
    return bicop_hinv2(t, p, u);
}

namespace {

struct Candidate {
    BicopFamily family;
    Rotation rotation;
};

double fit_loglik(const BicopModel& m, const Mat& uv) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < uv.rows(); ++i) {
        const double l = bicop_logpdf(m, uv(i, 0), uv(i, 1));
        if (!std::isfinite(l)) return -kInf;
        ll += l;
    }
    return ll;
}

// Subsampled view keeps the nu profile cheap on large inputs.
Mat stride_subsample(const Mat& uv, Eigen::Index cap) {
    if (uv.rows() <= cap) return uv;
    const Eigen::Index stride = (uv.rows() + cap - 1) / cap;
    const Eigen::Index m = (uv.rows() + stride - 1) / stride;
    Mat out(m, uv.cols());
    for (Eigen::Index i = 0; i < m; ++i) out.row(i) = uv.row(i * stride);
    return out;
}

BicopModel fit_one(BicopFamily family, Rotation rot, const Mat& uv, double tau) {
    BicopModel m;
    m.family = family;
    m.rotation = rot;
    const Eigen::Index n = uv.rows();

    switch (family) {
        case BicopFamily::Independence:
            m.params = Vec(0);
            m.loglik = 0.0;
            m.aic = 0.0;
            return m;
        case BicopFamily::Gaussian: {
            // the normal scores do not depend on rho; precompute once
            Vec x(n), y(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                x[i] = normal_ppf(clamp_u(uv(i, 0)));
                y[i] = normal_ppf(clamp_u(uv(i, 1)));
            }
            const double sxx = x.squaredNorm(), syy = y.squaredNorm(), sxy = x.dot(y);
            auto nll = [&](double z) {
                const double r = std::tanh(z);
                const double om = 1.0 - r * r;
                return 0.5 * n * std::log(om) +
                       (r * r * (sxx + syy) - 2.0 * r * sxy) / (2.0 * om);
            };
            const double z0 = std::atanh(std::clamp(std::sin(M_PI * tau / 2.0), -0.99, 0.99));
            const double z = scan_golden_min(nll, z0 - 1.5, z0 + 1.5, 16, 1e-8);
            m.params = Vec(1);
            m.params[0] = std::clamp(std::tanh(z), -0.9999, 0.9999);
            break;
        }
        case BicopFamily::StudentT: {
            const double rho = std::clamp(std::sin(M_PI * tau / 2.0), -0.99, 0.99);
            const Mat sub = stride_subsample(uv, 20000);
            auto nll = [&](double lnv) {
                BicopModel trial;
                trial.family = BicopFamily::StudentT;
                trial.rotation = rot;
                trial.params = Vec(2);
                trial.params << rho, 2.05 + std::exp(lnv);
                return -fit_loglik(trial, sub);
            };
            const double lnv = scan_golden_min(nll, std::log(0.1), std::log(48.0), 10, 1e-3);
            double nu = 2.05 + std::exp(lnv);
            if (nu >= 50.0) {
                // numerically indistinguishable from Gaussian; collapse
                m.family = BicopFamily::Gaussian;
                m.params = Vec(1);
                m.params[0] = rho;
            } else {
                m.params = Vec(2);
                m.params << rho, nu;
            }
            break;
        }
        case BicopFamily::Clayton:
        case BicopFamily::Gumbel:
        case BicopFamily::Frank:
        case BicopFamily::Joe: {
            double lo, hi;
            if (family == BicopFamily::Clayton) { lo = 1e-3; hi = 28.0; }
            else if (family == BicopFamily::Gumbel) { lo = 1.0 + 1e-6; hi = 50.0; }
            else if (family == BicopFamily::Joe) { lo = 1.0 + 1e-6; hi = 30.0; }
            else { lo = -35.0; hi = 35.0; }
            auto nll = [&](double th) {
                BicopModel trial;
                trial.family = family;
                trial.rotation = rot;
                trial.params = Vec(1);
                trial.params[0] = th;
                return -fit_loglik(trial, uv);
            };
            const double th = scan_golden_min(nll, lo, hi, 24, 1e-5);
            m.params = Vec(1);
            m.params[0] = th;
            break;
        }
    }

    m.loglik = fit_loglik(m, uv);
    const int k = m.family == BicopFamily::StudentT ? 2
                  : m.family == BicopFamily::Independence ? 0
                                                          : 1;
    m.aic = 2.0 * k - 2.0 * m.loglik;
    return m;
}

int bicop_param_count(const BicopModel& m) {
    return static_cast<int>(m.params.size());
}

}  // namespace

BicopModel fit_bicop(const Mat& uv, const BicopFamilySet& families) {
    if (uv.cols() != 2) throw std::invalid_argument("fit_bicop expects an n x 2 matrix");
    if (uv.rows() < 30) throw std::invalid_argument("fit_bicop needs n >= 30");

    bool degenerate = false;
    const double tau = kendall_tau(uv.col(0), uv.col(1), &degenerate);

    BicopModel best = fit_one(BicopFamily::Independence, Rotation::R0, uv, tau);
    if (degenerate) {
        best.fit_failed = true;
        return best;
    }

    // Kendall-tau independence pretest at the 5% level; only significant
    // dependence is worth a parametric fit
    const double n = static_cast<double>(uv.rows());
    const double tau_sd = std::sqrt(2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0)));
    if (std::fabs(tau) < 1.959963984540054 * tau_sd) return best;

    std::vector<Candidate> cands;
    for (BicopFamily f : families.families) {
        switch (f) {
            case BicopFamily::Gaussian:
            case BicopFamily::StudentT:
            case BicopFamily::Frank:
                cands.push_back({f, Rotation::R0});
                break;
            case BicopFamily::Clayton:
            case BicopFamily::Gumbel:
            case BicopFamily::Joe:
                if (tau >= 0.0) {
                    cands.push_back({f, Rotation::R0});
                    cands.push_back({f, Rotation::R180});
                } else {
                    cands.push_back({f, Rotation::R90});
                    cands.push_back({f, Rotation::R270});
                }
                break;
            default:
                break;
        }
    }

    bool any_ok = false;
    for (const auto& c : cands) {
        BicopModel m;
        try {
            m = fit_one(c.family, c.rotation, uv, tau);
        } catch (const std::exception&) {
            continue;
        }
        if (!std::isfinite(m.loglik)) continue;
        any_ok = true;
        if (m.aic < best.aic ||
            (m.aic == best.aic && bicop_param_count(m) < bicop_param_count(best)))
            best = m;
    }
    if (!any_ok && !cands.empty()) best.fit_failed = true;
    return best;
}

Mat bicop_sample(const BicopModel& m, int n, std::uint64_t seed) {
    Mat out(n, 2);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(seed, RngPurpose::Scenario, static_cast<std::uint64_t>(i)));
        const double u = rs.uniform();
        const double w = rs.uniform();
        out(i, 0) = u;
        out(i, 1) = bicop_hinv1(m, w, u);
    }
    return out;
}

Mat nearest_pd_correlation(const Mat& r, bool* projected) {
    const Eigen::Index d = r.rows();
    Eigen::SelfAdjointEigenSolver<Mat> es(r);
    const double min_eig = es.eigenvalues().minCoeff();
    if (projected) *projected = false;
    if (min_eig > 1e-8) {
        Mat out = r;
        for (Eigen::Index i = 0; i < d; ++i) out(i, i) = 1.0;
        return out;
    }
    if (projected) *projected = true;
    Vec ev = es.eigenvalues().cwiseMax(1e-8);
    Mat a = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    Vec inv_sd(d);
    for (Eigen::Index i = 0; i < d; ++i) inv_sd[i] = 1.0 / std::sqrt(a(i, i));
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) *= inv_sd[i] * inv_sd[j];
    for (Eigen::Index i = 0; i < d; ++i) a(i, i) = 1.0;
    return a;
}

EllipticalCopula fit_elliptical_copula(const Mat& u, EllipticalCopula::Kind kind) {
    const Eigen::Index n = u.rows(), d = u.cols();
    if (n < d + 10) throw std::invalid_argument("too few rows for elliptical copula fit");

    EllipticalCopula c;
    c.kind = kind;
    const Mat tau = kendall_tau_matrix(u);
    Mat r(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            r(i, j) = i == j ? 1.0 : std::sin(M_PI * tau(i, j) / 2.0);
    c.correlation = nearest_pd_correlation(r, &c.projected);

    if (kind == EllipticalCopula::Kind::StudentT) {
        const Mat sub = stride_subsample(u, 20000);
        const Eigen::Index m = sub.rows();
        Eigen::LLT<Mat> llt(c.correlation);
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        auto nll = [&](double lnv) {
            const double nu = 2.05 + std::exp(lnv);
            double ll = 0.0;
            Vec x(d);
            for (Eigen::Index i = 0; i < m; ++i) {
                double marg = 0.0;
                for (Eigen::Index k = 0; k < d; ++k) {
                    x[k] = student_t_ppf(clamp_u(sub(i, k)), nu);
                    marg += std::log(student_t_pdf(x[k], nu));
                }
                const Vec sol = llt.solve(x);
                const double quad = x.dot(sol);
                ll += std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
                      0.5 * d * std::log(nu * M_PI) - 0.5 * logdet -
                      0.5 * (nu + d) * std::log1p(quad / nu) - marg;
            }
            return -ll;
        };
        const double lnv = scan_golden_min(nll, std::log(0.1), std::log(300.0), 10, 1e-3);
        c.nu = 2.05 + std::exp(lnv);
    }
    return c;
}

Mat sample_elliptical_copula(const EllipticalCopula& c, int n, std::uint64_t seed) {
    const Eigen::Index d = c.correlation.rows();
    Eigen::LLT<Mat> llt(c.correlation);
    if (llt.info() != Eigen::Success)
        llt.compute(c.correlation + 1e-10 * Mat::Identity(d, d));
    const Mat l = llt.matrixL();

    Mat out(n, d);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        RngStream rs(substream(seed, RngPurpose::Scenario, static_cast<std::uint64_t>(i)));
        Vec z(d);
        for (Eigen::Index k = 0; k < d; ++k) z[k] = rs.normal();
        Vec x = l * z;
        if (c.kind == EllipticalCopula::Kind::StudentT) {
            const double w = chi2_ppf(rs.uniform(), c.nu);
            x /= std::sqrt(w / c.nu);
            for (Eigen::Index k = 0; k < d; ++k)
                out(i, k) = student_t_cdf(x[k], c.nu);
        } else {
            for (Eigen::Index k = 0; k < d; ++k) out(i, k) = normal_cdf(x[k]);
        }
    }
    return out;
}

nlohmann::json bicop_to_json(const BicopModel& m) {
    return nlohmann::json{
        {"family", bicop_family_name(m.family)},
        {"rotation", static_cast<int>(m.rotation)},
        {"params", std::vector<double>(m.params.data(), m.params.data() + m.params.size())},
        {"aic", m.aic}};
}

BicopModel bicop_from_json(const nlohmann::json& j) {
    BicopModel m;
    const std::string fam = j.at("family");
    for (int f = 0; f <= static_cast<int>(BicopFamily::Joe); ++f)
        if (bicop_family_name(static_cast<BicopFamily>(f)) == fam)
            m.family = static_cast<BicopFamily>(f);
    m.rotation = static_cast<Rotation>(j.at("rotation").get<int>());
    const auto pv = j.at("params").get<std::vector<double>>();
    m.params = Eigen::Map<const Vec>(pv.data(), static_cast<Eigen::Index>(pv.size()));
    m.aic = j.at("aic");
    return m;
}

nlohmann::json elliptical_to_json(const EllipticalCopula& c) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.correlation.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < c.correlation.cols(); ++j) row.push_back(c.correlation(i, j));
        rows.push_back(row);
    }
    return nlohmann::json{{"kind", c.kind == EllipticalCopula::Kind::Gaussian ? "gaussian" : "student_t"},
                          {"correlation", rows},
                          {"nu", c.nu}};
}

EllipticalCopula elliptical_from_json(const nlohmann::json& j) {
    EllipticalCopula c;
    c.kind = j.at("kind") == "gaussian" ? EllipticalCopula::Kind::Gaussian
                                        : EllipticalCopula::Kind::StudentT;
    const auto& rows = j.at("correlation");
    const Eigen::Index d = static_cast<Eigen::Index>(rows.size());
    c.correlation.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) c.correlation(i, k) = rows[i][k].get<double>();
    c.nu = j.at("nu");
    return c;
}

}  // namespace genport
