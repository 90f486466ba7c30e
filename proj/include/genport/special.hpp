#pragma once

#include <cmath>
#include <functional>

// Scalar special functions used across the library. Everything here is
// deterministic double-precision arithmetic with no global state.

namespace genport {

inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// Inverse standard normal CDF (Wichura's PPND16), |error| < 1e-15.
double normal_ppf(double p);

// logit(p) = log(p) - log(1-p), computed via log1p for symmetry:
// logit_sym(-c) == -logit_sym(c) exactly in IEEE arithmetic.
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// logit((1+c)/2) without forming the ratio; exact antisymmetry in c.
inline double logit_half_shift(double c) { return std::log1p(c) - std::log1p(-c); }

inline double expit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double digamma(double x);
double trigamma(double x);
// Inverse of digamma by Newton iteration (Minka's initialisation).
double digamma_inv(double y);

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Regularized incomplete beta I_x(a,b) and its inverse in x.
double inc_beta(double a, double b, double x);
double inc_beta_inv(double a, double b, double p);

// Regularized lower incomplete gamma P(a,x) and its inverse in x.
double inc_gamma_p(double a, double x);
double inc_gamma_p_inv(double a, double p);

// Student's t (standardized, nu degrees of freedom).
double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
double student_t_ppf(double u, double nu);

// Noncentral t with noncentrality delta; CDF via Lenth's series,
// density via the exact term-wise derivative of that series.
double nct_cdf(double x, double nu, double delta);
double nct_logpdf(double x, double nu, double delta);
double nct_ppf(double u, double nu, double delta);

// Chi-square quantile (used for multivariate t mixing draws).
inline double chi2_ppf(double u, double nu) { return 2.0 * inc_gamma_p_inv(0.5 * nu, u); }

// Solve f(x) = target for monotone increasing f on [lo, hi] by bisection
// with a Newton polish when df is supplied. Tolerance is on x.
double invert_monotone(const std::function<double(double)>& f, double target,
                       double lo, double hi, double xtol = 1e-13, int max_iter = 200);

}  // namespace genport
