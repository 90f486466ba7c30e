#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class BicopFamily { Independence, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe };
enum class Rotation { R0 = 0, R90 = 90, R180 = 180, R270 = 270 };

std::string bicop_family_name(BicopFamily f);

struct BicopModel {
    BicopFamily family = BicopFamily::Independence;
    Rotation rotation = Rotation::R0;
    Vec params;  // Gaussian: rho; StudentT: rho, nu; Archimedean: theta
    double aic = 0.0;
    double loglik = 0.0;
    bool fit_failed = false;  // Independence fallback after failed fits
};

// Family presets matching the generative-model labels.
struct BicopFamilySet {
    std::vector<BicopFamily> families;
    bool include_joe = true;

    static BicopFamilySet elliptical();
    static BicopFamilySet archimedean(bool include_joe = true);
    static BicopFamilySet allfam(bool include_joe = true);
    static BicopFamilySet from_name(const std::string& preset);
};

// h-function conventions:
//   hfunc1(u, v) = P(V <= v | U = u)      hinv1 solves for v
//   hfunc2(u, v) = P(U <= u | V = v)      hinv2 solves for u
// Arguments are clamped into [1e-10, 1-1e-10].
double bicop_logpdf(const BicopModel& m, double u, double v);
double bicop_cdf(const BicopModel& m, double u, double v);
double bicop_hfunc1(const BicopModel& m, double u, double v);
double bicop_hfunc2(const BicopModel& m, double u, double v);
double bicop_hinv1(const BicopModel& m, double p, double u);
double bicop_hinv2(const BicopModel& m, double p, double v);

// Spec-facing aliases: conditional CDF of u given V = v and its inverse.
inline double bicop_hfunc(const BicopModel& m, double u, double v) { return bicop_hfunc2(m, u, v); }
inline double bicop_hinv(const BicopModel& m, double p, double v) { return bicop_hinv2(m, p, v); }

// MLE per candidate (family, rotation), minimum AIC wins. Independence is
// always a candidate with AIC 0 and is selected outright when the sample
// tau fails a 5% independence test. Negative-dependence rotations are
// tried when the sample tau is negative.
BicopModel fit_bicop(const Mat& uv, const BicopFamilySet& families);

// Conditional sampling through hinv1; used by simulate-and-refit oracles.
Mat bicop_sample(const BicopModel& m, int n, std::uint64_t seed);

// Eigenvalue clipping at 1e-8 followed by rescaling to unit diagonal.
Mat nearest_pd_correlation(const Mat& r, bool* projected = nullptr);

struct EllipticalCopula {
    enum class Kind { Gaussian, StudentT };
    Kind kind = Kind::Gaussian;
    Mat correlation;
    double nu = 8.0;  // StudentT only
    bool projected = false;
};

// Pairwise-tau inversion sin(pi tau / 2) with nearest-PD projection;
// Student-t degrees of freedom by 1-d profile MLE.
EllipticalCopula fit_elliptical_copula(const Mat& u, EllipticalCopula::Kind kind);
Mat sample_elliptical_copula(const EllipticalCopula& c, int n, std::uint64_t seed);

nlohmann::json bicop_to_json(const BicopModel& m);
BicopModel bicop_from_json(const nlohmann::json& j);
nlohmann::json elliptical_to_json(const EllipticalCopula& c);
EllipticalCopula elliptical_from_json(const nlohmann::json& j);

}  // namespace genport
