#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class MarginalFamily {
    Gaussian,
    StudentT,
    NoncentralT,
    JohnsonSU,
    TukeyLambda,
    Laplace,
    AsymmetricLaplace,
    Empirical,
};

std::string marginal_family_name(MarginalFamily f);
MarginalFamily marginal_family_from_name(const std::string& name);
int marginal_param_count(MarginalFamily f);

// Parameter layout by family:
//   Gaussian          (mu, sigma)
//   StudentT          (loc, scale, nu)
//   NoncentralT       (loc, scale, nu, nc)
//   JohnsonSU         (gamma, delta, xi, lambda)
//   TukeyLambda       (lambda, loc, scale)
//   Laplace           (loc, scale)
//   AsymmetricLaplace (loc, scale, kappa)
//   Empirical         none; sorted sample retained
struct MarginalModel {
    MarginalFamily family = MarginalFamily::Gaussian;
    Vec params;
    double aic = 0.0;  // +inf for Empirical so AIC selection never prefers it
    int n_obs = 0;
    bool converged = true;
    std::vector<double> sample;  // Empirical only, sorted ascending
};

// MLE with the family's native parameter constraints enforced through
// unconstrained transforms. Throws on degenerate input (constant sample,
// length < 20, non-finite values); non-convergence is reported through the
// `converged` flag with the best parameters found.
MarginalModel fit_marginal(const Vec& sample, MarginalFamily family);

// Smallest AIC wins; ties go to fewer parameters, then enum order.
MarginalModel select_marginal(const Vec& sample, const std::vector<MarginalFamily>& families);

double marginal_logpdf(const MarginalModel& m, double x);
double marginal_cdf(const MarginalModel& m, double x);
double marginal_ppf(const MarginalModel& m, double u);

nlohmann::json marginal_to_json(const MarginalModel& m);
MarginalModel marginal_from_json(const nlohmann::json& j);

const std::vector<MarginalFamily>& all_parametric_families();

}  // namespace genport
