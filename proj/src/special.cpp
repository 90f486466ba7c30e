#include "genport/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace genport {

double normal_ppf(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -v : v;
}

double digamma(double x) {
    if (x <= 0.0 && x == std::floor(x))
        return std::numeric_limits<double>::quiet_NaN();
    double result = 0.0;
    // reflection for negative arguments
    if (x < 0.0) {
        result = -M_PI / std::tan(M_PI * x);
        x = 1.0 - x;
    }
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double x1 = 1.0 / x, x2 = x1 * x1;
    result += std::log(x) - 0.5 * x1 -
              x2 * (1.0 / 12.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 * (1.0 / 240.0 - x2 / 132.0))));
    return result;
}

double trigamma(double x) {
    if (x <= 0.0 && x == std::floor(x))
        return std::numeric_limits<double>::quiet_NaN();
    double result = 0.0;
    while (x < 10.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double x1 = 1.0 / x, x2 = x1 * x1;
    result += x1 * (1.0 + 0.5 * x1 + x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0))));
    return result;
}

double digamma_inv(double y) {
    double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y - digamma(1.0));
    for (int i = 0; i < 8; ++i)
        x -= (digamma(x) - y) / trigamma(x);
    return x;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 3e-16) break;
    }
    return h;
}

}  // namespace

double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(lbt) * betacf(a, b, x) / a;
    return 1.0 - std::exp(lbt) * betacf(b, a, 1.0 - x) / b;
}

double inc_beta_inv(double a, double b, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    // initial guess per Numerical Recipes, then safeguarded Newton
    double x;
    if (a >= 1.0 && b >= 1.0) {
        const double pp = p < 0.5 ? p : 1.0 - p;
        const double t = std::sqrt(-2.0 * std::log(pp));
        double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if (p < 0.5) z = -z;
        const double al = (z * z - 3.0) / 6.0;
        const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        const double w = z * std::sqrt(al + h) / h -
                         (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        x = a / (a + b * std::exp(2.0 * w));
    } else {
        const double lna = std::log(a / (a + b)), lnb = std::log(b / (a + b));
        const double t = std::exp(a * lna) / a, u = std::exp(b * lnb) / b;
        const double w = t + u;
        if (p < t / w)
            x = std::pow(a * w * p, 1.0 / a);
        else
            x = 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
    }
    double lo = 0.0, hi = 1.0;
    const double lbeta = log_beta(a, b);
    for (int it = 0; it < 100; ++it) {
        if (x <= lo || x >= hi) x = 0.5 * (lo + hi);
        const double err = inc_beta(a, b, x) - p;
        if (err > 0.0) hi = x; else lo = x;
        if (std::fabs(err) < 1e-15 || hi - lo < 1e-16) break;
        const double logpdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
        const double step = err * std::exp(-logpdf);
        // a vanishing Newton step means x is already the root to machine
        // precision; bail out before the bracket fallback can kick in
        if (std::fabs(step) < 1e-15 * std::max(x, 1e-8)) break;
        const double xn = x - step;
        x = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
    }
    return x;
}

double inc_gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) {
        // series
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // continued fraction for Q, return 1-Q
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double inc_gamma_p_inv(double a, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    // Wilson-Hilferty start
    const double z = normal_ppf(p);
    double t = 1.0 - 2.0 / (9.0 * a) + z * std::sqrt(2.0 / (9.0 * a));
    double x = a * t * t * t;
    if (x <= 0.0) x = 1e-8;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    const double lga = std::lgamma(a);
    for (int it = 0; it < 100; ++it) {
        const double err = inc_gamma_p(a, x) - p;
        if (err > 0.0) hi = x; else lo = x;
        if (std::fabs(err) < 1e-15) break;
        const double logpdf = -x + (a - 1.0) * std::log(x) - lga;
        const double step = err * std::exp(-logpdf);
        if (std::fabs(step) < 1e-14 * std::max(x, 1e-10)) break;
        double xn = x - step;
        if (!(xn > lo && xn < hi))
            xn = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
        x = xn;
    }
    return x;
}

double student_t_pdf(double x, double nu) {
    const double lg = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                      0.5 * std::log(nu * M_PI);
    return std::exp(lg - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double student_t_cdf(double x, double nu) {
    if (x == 0.0) return 0.5;
    const double w = nu / (nu + x * x);
    const double p = 0.5 * inc_beta(0.5 * nu, 0.5, w);
    return x > 0.0 ? 1.0 - p : p;
}

double student_t_ppf(double u, double nu) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    if (u >= 1.0) return std::numeric_limits<double>::infinity();
    if (u == 0.5) return 0.0;
    const double z = 2.0 * std::min(u, 1.0 - u);
    const double w = inc_beta_inv(0.5 * nu, 0.5, z);
    const double t = std::sqrt(nu * (1.0 - w) / w);
    return u < 0.5 ? -t : t;
}

namespace {

// Lenth-style series for the noncentral t. Returns CDF for x >= 0; the
// weight recurrences keep each term O(1).
double nct_cdf_nonneg(double x, double nu, double delta) {
    const double y = x * x / (x * x + nu);
    double sum = normal_cdf(-delta);
    if (y <= 0.0) return sum;
    const double hd2 = 0.5 * delta * delta;
    // p_j: Poisson(hd2) mass at j;  q_j: delta/(sqrt(2)Gamma(j+3/2)) * hd2^j * e^{-hd2}
    double pj = std::exp(-hd2);
    double qj = delta * std::exp(-hd2) / (std::sqrt(2.0) * std::tgamma(1.5));
    // I_y(a, b) with a = j+1/2 (for p) and a = j+1 (for q), b = nu/2
    double ip = inc_beta(0.5, 0.5 * nu, y);
    double iq = inc_beta(1.0, 0.5 * nu, y);
    // increments for the recurrence I_y(a+1,b) = I_y(a,b) - y^a (1-y)^b / (a B(a,b))
    const double lny = std::log(y), ln1my = std::log1p(-y);
    double tail = 0.0;
    for (int j = 0; j < 1000; ++j) {
        const double a_p = j + 0.5, a_q = j + 1.0, b = 0.5 * nu;
        sum += 0.5 * (pj * ip + qj * iq);
        tail += pj + qj / std::sqrt(2.0);
        if (tail > 1.0 - 1e-14 && pj * ip + qj * iq < 1e-15) break;
        const double dp = std::exp(a_p * lny + b * ln1my - std::log(a_p) - log_beta(a_p, b));
        const double dq = std::exp(a_q * lny + b * ln1my - std::log(a_q) - log_beta(a_q, b));
        ip -= dp;
        iq -= dq;
        if (ip < 0.0) ip = 0.0;
        if (iq < 0.0) iq = 0.0;
        pj *= hd2 / (j + 1.0);
        qj *= hd2 / (j + 1.5);
    }
    return std::min(sum, 1.0);
}

}  // namespace

double nct_cdf(double x, double nu, double delta) {
    if (x >= 0.0) return nct_cdf_nonneg(x, nu, delta);
    return 1.0 - nct_cdf_nonneg(-x, nu, -delta);
}

double nct_logpdf(double x, double nu, double delta) {
    // derivative of the Lenth series: each incomplete beta becomes a beta
    // density at y = x^2/(x^2+nu); works termwise without differencing CDFs.
    double xx = x, dd = delta;
    if (x < 0.0) { xx = -x; dd = -delta; }
    if (xx < 1e-8) {
        const double lg = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(M_PI * nu) - 0.5 * dd * dd;
        return lg;
    }
    const double y = xx * xx / (xx * xx + nu);
    const double dydx = 2.0 * xx * nu / ((xx * xx + nu) * (xx * xx + nu));
    const double hd2 = 0.5 * dd * dd;
    double pj = std::exp(-hd2);
    double qj = dd * std::exp(-hd2) / (std::sqrt(2.0) * std::tgamma(1.5));
    const double lny = std::log(y), ln1my = std::log1p(-y);
    double dens = 0.0;
    for (int j = 0; j < 1000; ++j) {
        const double a_p = j + 0.5, a_q = j + 1.0, b = 0.5 * nu;
        const double fp = std::exp((a_p - 1.0) * lny + (b - 1.0) * ln1my - log_beta(a_p, b));
        const double fq = std::exp((a_q - 1.0) * lny + (b - 1.0) * ln1my - log_beta(a_q, b));
        const double term = 0.5 * (pj * fp + qj * fq);
        dens += term;
        if (j > 3 && term < dens * 1e-14) break;
        pj *= hd2 / (j + 1.0);
        qj *= hd2 / (j + 1.5);
    }
    dens *= dydx;
    if (!(dens > 0.0)) return -745.0;  // log of smallest normal double, effectively -inf
    return std::log(dens);
}

double nct_ppf(double u, double nu, double delta) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    if (u >= 1.0) return std::numeric_limits<double>::infinity();
    // bracket around a t-quantile shifted by delta, then bisect
    double lo = delta + student_t_ppf(std::min(u, 1e-3), nu) - 1.0;
    double hi = delta + student_t_ppf(std::max(u, 1.0 - 1e-3), nu) + 1.0;
    while (nct_cdf(lo, nu, delta) > u) lo = delta + 2.0 * (lo - delta) - 1.0;
    while (nct_cdf(hi, nu, delta) < u) hi = delta + 2.0 * (hi - delta) + 1.0;
    return invert_monotone([&](double t) { return nct_cdf(t, nu, delta); }, u, lo, hi, 1e-11);
}

double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi, double xtol, int max_iter) {
    double flo = f(lo) - target, fhi = f(hi) - target;
    if (flo > 0.0) return lo;
    if (fhi < 0.0) return hi;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x) - target;
        if (fx > 0.0) hi = x; else lo = x;
        x = 0.5 * (lo + hi);
        if (hi - lo < xtol) break;
    }
    return x;
}

}  // namespace genport
