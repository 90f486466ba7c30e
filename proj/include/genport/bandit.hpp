#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace genport {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class SimilarityKind { Cosine, Zscore, L1, L2, Linf };
enum class ActivationKind { Maxout, Softmax, Logistic, Tanh, LeakyRelu, Logit, Probit };
enum class PolicyKind { Blend, Switch };

// attribution labels: "cosine", "ndtr", "L1", "L2", "Linf"
std::string similarity_label(SimilarityKind k);
SimilarityKind similarity_from_label(const std::string& s);
// "maxout", "softmax", "logistic", "tanh", "leaky relu", "logit", "probit"
std::string activation_label(ActivationKind k);
ActivationKind activation_from_label(const std::string& s);
std::string policy_label(PolicyKind k);
PolicyKind policy_from_label(const std::string& s);

// Ex-post alignment of decided weights with realized returns, in [-1,1].
// Zero realized vector yields 0 (flagged through *degenerate).
double similarity(SimilarityKind kind, const Vec& w0, const Vec& realized,
                  bool* degenerate = nullptr);

// Grades per activation, normalized to the simplex; an all-zero grade
// vector falls back to the uniform distribution (flag via *uniform_fallback).
// leaky_relu_verbatim keeps the printed 1/7 + 7|s| form; the alternative is
// a conventional leaky-relu with slope 1/7 on negatives, clamped at zero.
Vec optimality(ActivationKind kind, const Vec& similarities, bool leaky_relu_verbatim = true,
               bool* uniform_fallback = nullptr);

// rows: oldest first; the most recent row carries decay weight gamma^0
struct OptimalityHistory {
    Mat pi;  // window x P, rows on the simplex
};

// closed form: theta_p = sum_t gamma^t pi_{t,p} / sum_{p,t} gamma^t pi_{t,p}
Vec wmle_categorical(const OptimalityHistory& history, double gamma);

// weighted Dirichlet MLE; fixed point plus Newton polish, gradient at the
// solution below 1e-6 in infinity norm. Moment-matching fallback on failure.
Vec wmle_dirichlet(const OptimalityHistory& history, double gamma, bool* fallback = nullptr);

// closed form: sum_t gamma^t pi_t / sum_t gamma^t (series oldest first)
double wmle_bernoulli(const Vec& series, double gamma);

struct BetaFit {
    double theta = 0.5;  // mean
    double nu = 2.0;     // concentration, capped at 1e6
    bool fallback = false;
};
BetaFit wmle_beta(const Vec& series, double gamma);

// Blend: psi = theta / sum(theta). Switch: one-hot argmax, ties to the
// lowest index.
Vec policy_ratio(const Vec& theta, PolicyKind policy);

// w_ecl = sum_p psi_p w_p; intentionally not renormalized.
Vec eclectic_weights(const Vec& psi, const std::vector<Vec>& arm_weights);

// weighted log-likelihoods, exposed for the closed-form-vs-numeric checks
double dirichlet_weighted_loglik(const OptimalityHistory& history, double gamma, const Vec& theta);
double beta_weighted_loglik(const Vec& series, double gamma, double theta, double nu);
double categorical_weighted_loglik(const OptimalityHistory& history, double gamma, const Vec& theta);
double bernoulli_weighted_loglik(const Vec& series, double gamma, double theta);

}  // namespace genport
