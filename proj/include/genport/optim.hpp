#pragma once

#include <Eigen/Dense>
#include <functional>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct NelderMeadOptions {
    int max_evals = 2000;
    double xtol = 1e-7;      // stop when the simplex diameter falls below this
    double ftol = 0.0;       // optional spread criterion, 0 disables
    double init_step = 0.25;
};

struct NelderMeadResult {
    Vec x;
    double fx = 0.0;
    int evals = 0;
    bool converged = false;
};

// Minimizes f. Derivative-free; safe for nonsmooth objectives.
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f,
                             const Vec& x0, const NelderMeadOptions& opt = {});

// 1-d minimizer on [lo, hi]: coarse scan followed by golden-section refine.
double scan_golden_min(const std::function<double(double)>& f, double lo,
                       double hi, int scan_points = 20, double xtol = 1e-7);

}  // namespace genport
