#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class AttributionScheme { FixedArm, Eclectic };
enum class AttributionMeasure { SimpleReturn, LogitCosine };

// one backtest step in tidy form; only the fields of the chosen scheme
// are consulted
struct AttributionRecord {
    std::string genmodel;
    std::string objective;
    std::string tcav;  // "1.0", "2.0", ...
    std::string simimtd;
    std::string actfun;
    std::string decay;
    std::string bldmtd;
    double simple_return = 0.0;
    double logit_cosine = 0.0;
};

struct AttributionDataset {
    Mat x;  // binary 0/1
    Vec y;
    std::vector<std::string> column_labels;  // "intercept", "GenMdl ...", "A : B"
    std::vector<bool> penalized;             // intercept is not
};

// FixedArm rows carry exactly 7 ones (intercept + 3 one-hots + 3 pairwise
// interactions); Eclectic rows exactly 11 (intercept + 4 one-hots + 6
// pairwise interactions).
AttributionDataset build_design_matrix(const std::vector<AttributionRecord>& records,
                                       AttributionScheme scheme, AttributionMeasure measure);

// Cyclic coordinate descent with soft thresholding; unpenalized columns get
// plain least-squares updates. KKT residual below 1e-7 at exit.
Vec lasso_fit(const Mat& x, const Vec& y, double lambda,
              const std::vector<bool>* penalized = nullptr);

// Warm-started path over a descending grid.
std::vector<Vec> lasso_path(const Mat& x, const Vec& y, const std::vector<double>& grid,
                            const std::vector<bool>* penalized = nullptr);

double lasso_lambda_max(const Mat& x, const Vec& y, const std::vector<bool>* penalized = nullptr);
std::vector<double> default_lambda_grid(double lambda_max, int points = 100,
                                        double min_ratio = 1e-4);

struct LassoFit {
    Vec beta;
    double lambda_star = 0.0;
    std::vector<double> grid;
    Mat cv_mse;  // folds x grid
};

// lambda* is the mean over folds of the per-fold-MSE-minimizing lambda;
// the final fit uses all rows at lambda*. Fold assignment is uniformly
// random under the given seed.
LassoFit lasso_cv(const Mat& x, const Vec& y, int folds, const std::vector<double>& grid,
                  const std::vector<bool>* penalized = nullptr, std::uint64_t seed = 7);

// `coefficient,value` rows sorted descending by value.
void write_coefficient_csv(const std::string& path, const std::vector<std::string>& labels,
                           const Vec& beta, bool nonzero_only = true);

}  // namespace genport
