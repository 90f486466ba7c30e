#include <doctest.h>

#include <cmath>

#include "genport/special.hpp"

using namespace genport;

TEST_SUITE_BEGIN("special");

TEST_CASE("normal ppf and cdf invert each other") {
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
        const double x = normal_ppf(p);
        CHECK(normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_ppf(0.5) == 0.0);
    // classic table values
    CHECK(normal_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("incomplete beta against known t quantiles") {
    // t_5 two-sided 5% quantile
    CHECK(student_t_ppf(0.975, 5.0) == doctest::Approx(2.570581835636197).epsilon(1e-9));
    CHECK(student_t_ppf(0.025, 5.0) == doctest::Approx(-2.570581835636197).epsilon(1e-9));
    CHECK(student_t_cdf(0.0, 7.0) == doctest::Approx(0.5));
    for (double u : {0.01, 0.2, 0.5, 0.8, 0.99})
        for (double nu : {2.5, 4.0, 12.0})
            CHECK(student_t_cdf(student_t_ppf(u, nu), nu) == doctest::Approx(u).epsilon(1e-10));
}

TEST_CASE("incomplete beta inverse with a small second parameter") {
    // large a with b = 0.5 concentrates all mass near 1; the Newton step
    // underflows there and used to trip a midpoint fallback
    for (double a : {5.0, 18.2978, 60.0})
        for (double p : {0.05, 0.5, 0.9, 0.943377829, 0.999}) {
            const double x = inc_beta_inv(a, 0.5, p);
            CHECK(inc_beta(a, 0.5, x) == doctest::Approx(p).epsilon(1e-9));
        }
    // mid-range t quantiles at moderately large nu go through that corner
    for (double nu : {20.0, 35.59566, 80.0})
        for (double u : {0.446208356, 0.501, 0.55, 0.7}) {
            const double x = student_t_ppf(u, nu);
            CHECK(student_t_cdf(x, nu) == doctest::Approx(u).epsilon(1e-10));
            CHECK(std::fabs(x) < 1.0);  // mid-range quantiles are small
        }
}

TEST_CASE("incomplete gamma inverse round trip") {
    for (double a : {0.7, 2.0, 5.5})
        for (double p : {0.05, 0.5, 0.95}) {
            const double x = inc_gamma_p_inv(a, p);
            CHECK(inc_gamma_p(a, x) == doctest::Approx(p).epsilon(1e-10));
        }
}

TEST_CASE("digamma, trigamma and the digamma inverse") {
    // psi(1) = -gamma_E
    CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-12));
    CHECK(trigamma(1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
    for (double x : {0.3, 1.7, 9.0})
        CHECK(digamma_inv(digamma(x)) == doctest::Approx(x).epsilon(1e-9));
}

TEST_CASE("noncentral t reduces to central t at delta = 0") {
    for (double x : {-2.0, -0.3, 0.0, 1.5})
        CHECK(nct_cdf(x, 6.0, 0.0) == doctest::Approx(student_t_cdf(x, 6.0)).epsilon(1e-10));
    for (double x : {-1.0, 0.4})
        CHECK(nct_logpdf(x, 6.0, 0.0) ==
              doctest::Approx(std::log(student_t_pdf(x, 6.0))).epsilon(1e-8));
}

TEST_CASE("noncentral t density integrates to its cdf") {
    // trapezoid over the density vs cdf difference
    const double nu = 5.0, delta = 1.2;
    const double a = -2.0, b = 3.0;
    const int n = 4000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = a + (b - a) * (i + 0.5) / n;
        acc += std::exp(nct_logpdf(x, nu, delta)) * (b - a) / n;
    }
    CHECK(acc == doctest::Approx(nct_cdf(b, nu, delta) - nct_cdf(a, nu, delta)).epsilon(1e-6));
}

TEST_CASE("noncentral t ppf round trip") {
    for (double u : {0.05, 0.4, 0.9})
        CHECK(nct_cdf(nct_ppf(u, 4.5, -0.8), 4.5, -0.8) == doctest::Approx(u).epsilon(1e-8));
}

TEST_CASE("logit symmetry is exact") {
    for (double c : {0.0, 0.1, 0.5, 0.99, 0.999999}) {
        CHECK(logit_half_shift(-c) == -logit_half_shift(c));
    }
    CHECK(logit(0.5) == 0.0);
}

TEST_SUITE_END();
