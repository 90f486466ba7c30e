#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class InnovationDist { Gaussian, StudentT };

std::string innovation_dist_name(InnovationDist d);

// r_t = mu + a_t,  a_t = sqrt(h_t) z_t,  h_t = alpha0 + alpha1 a_{t-1}^2 + beta1 h_{t-1}
struct GarchModel {
    double mu = 0.0;
    double alpha0 = 1e-6;
    double alpha1 = 0.05;
    double beta1 = 0.90;
    InnovationDist dist = InnovationDist::Gaussian;
    double nu = 8.0;  // StudentT innovations only
    double last_h = 1.0;
    double last_a = 0.0;
    bool converged = true;
    bool boundary = false;  // alpha1 + beta1 within 1e-6 of 1

    double unconditional_variance() const { return alpha0 / (1.0 - alpha1 - beta1); }
    double forecast_variance() const { return alpha0 + alpha1 * last_a * last_a + beta1 * last_h; }
};

struct GarchFilterResult {
    Vec z;  // standardized residuals
    Vec h;  // conditional variance path
};

// Quasi-MLE under the stationarity constraint alpha1 + beta1 < 1; the
// variance recursion is seeded with the sample variance.
GarchModel fit_garch11(const Vec& returns, InnovationDist dist = InnovationDist::Gaussian);

GarchFilterResult garch_filter(const GarchModel& model, const Vec& returns);

// Path simulator used by the simulate-and-refit oracles; includes burn-in.
Vec simulate_garch11_path(const GarchModel& model, int t_steps, std::uint64_t seed);

// Q_t = (1-a-b) Qbar + a eps'eps + b Q_{t-1};  R_t from Q_t rescaled.
struct DccModel {
    double a = 0.0;
    double b = 0.0;
    Mat qbar;
    Mat last_q;
    Vec last_eps;
    std::vector<GarchModel> garch;  // attached by the scenario layer
    Vec mu;                         // per-asset mean, attached with garch
    InnovationDist dist = InnovationDist::Gaussian;
    double nu = 8.0;
    bool converged = true;
    bool jittered = false;  // Qbar needed a diagonal bump
};

// Two-step QMLE on already-standardized residuals (one column per asset).
DccModel fit_dcc11(const Mat& std_residuals, InnovationDist dist = InnovationDist::Gaussian);

// Conditional correlation path implied by the model on given residuals.
std::vector<Mat> dcc_correlation_path(const DccModel& model, const Mat& std_residuals);

// Simulates a standardized-residual path from the correlation dynamics;
// used by the refit oracle.
Mat simulate_dcc_eps_path(double a, double b, const Mat& qbar, int t_steps,
                          std::uint64_t seed, InnovationDist dist = InnovationDist::Gaussian,
                          double nu = 8.0);

// One-step-ahead scenario draw: n rows of simulated asset returns. Needs
// garch states and mu attached.
Mat simulate_dcc(const DccModel& model, int n, std::uint64_t seed);

nlohmann::json garch_to_json(const GarchModel& m);
GarchModel garch_from_json(const nlohmann::json& j);
nlohmann::json dcc_to_json(const DccModel& m);
DccModel dcc_from_json(const nlohmann::json& j);

}  // namespace genport
