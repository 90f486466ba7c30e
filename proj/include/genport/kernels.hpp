#pragma once

#include <Eigen/Dense>

// Hot data-parallel kernels. Each kernel has a serial reference
// implementation (suffix _serial) that the OpenMP version must match
// bit-for-bit; the test suite and bench_kernels compare the two.

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// r_p[i] = sum_d R(i,d)*w[d] - cost, with the inner sum accumulated in
// column order so both variants produce identical doubles.
Vec portfolio_returns_serial(const Mat& scenarios, const Vec& w, double cost);
Vec portfolio_returns(const Mat& scenarios, const Vec& w, double cost);

// Tie-adjusted Kendall tau-b, O(n log n) (merge-sort inversion counting).
// Constant input yields 0; *degenerate is set when provided.
double kendall_tau(const Vec& x, const Vec& y, bool* degenerate = nullptr);

Mat kendall_tau_matrix_serial(const Mat& cols);
Mat kendall_tau_matrix(const Mat& cols);

// Column-wise average ranks scaled by 1/(rows+1).
Mat pseudo_observations(const Mat& sample);

}  // namespace genport
