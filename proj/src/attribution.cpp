#include "genport/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "genport/rng.hpp"

namespace genport {

namespace {

std::vector<std::string> level_values(const std::vector<AttributionRecord>& records,
                                      const std::string& factor) {
    std::vector<std::string> out;
    auto push = [&](const std::string& v) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    for (const auto& r : records) {
        if (factor == "GenMdl") push(r.genmodel);
        else if (factor == "ObjFun") push(r.objective);
        else if (factor == "TCAvs") push(r.tcav);
        else if (factor == "SimiMtd") push(r.simimtd);
        else if (factor == "ActFun") push(r.actfun);
        else if (factor == "Decay") push(r.decay);
        else if (factor == "BldMtd") push(r.bldmtd);
    }
    for (const auto& v : out)
        if (v.empty()) throw std::invalid_argument("record missing " + factor + " label");
    return out;
}

std::string record_value(const AttributionRecord& r, const std::string& factor) {
    if (factor == "GenMdl") return r.genmodel;
    if (factor == "ObjFun") return r.objective;
    if (factor == "TCAvs") return r.tcav;
    if (factor == "SimiMtd") return r.simimtd;
    if (factor == "ActFun") return r.actfun;
    if (factor == "Decay") return r.decay;
    return r.bldmtd;
}

}  // namespace

AttributionDataset build_design_matrix(const std::vector<AttributionRecord>& records,
                                       AttributionScheme scheme, AttributionMeasure measure) {
    if (records.empty()) throw std::invalid_argument("no records");

    const std::vector<std::string> factors =
        scheme == AttributionScheme::FixedArm
            ? std::vector<std::string>{"GenMdl", "ObjFun", "TCAvs"}
            : std::vector<std::string>{"SimiMtd", "ActFun", "Decay", "BldMtd"};

    std::map<std::string, std::vector<std::string>> levels;
    for (const auto& f : factors) levels[f] = level_values(records, f);

    AttributionDataset ds;
    ds.column_labels.push_back("intercept");
    // column index of (factor, level) and of (factor pair, level pair)
    std::map<std::string, int> index;
    for (const auto& f : factors)
        for (const auto& v : levels[f]) {
            index[f + " " + v] = static_cast<int>(ds.column_labels.size());
            ds.column_labels.push_back(f + " " + v);
        }
    for (std::size_t i = 0; i < factors.size(); ++i)
        for (std::size_t j = i + 1; j < factors.size(); ++j)
            for (const auto& vi : levels[factors[i]])
                for (const auto& vj : levels[factors[j]]) {
                    const std::string label =
                        factors[i] + " " + vi + " : " + factors[j] + " " + vj;
                    index[label] = static_cast<int>(ds.column_labels.size());
                    ds.column_labels.push_back(label);
                }

    const Eigen::Index n = static_cast<Eigen::Index>(records.size());
    const Eigen::Index p = static_cast<Eigen::Index>(ds.column_labels.size());
    ds.x = Mat::Zero(n, p);
    ds.y.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = records[static_cast<std::size_t>(r)];
        ds.x(r, 0) = 1.0;
        for (const auto& f : factors)
            ds.x(r, index.at(f + " " + record_value(rec, f))) = 1.0;
        for (std::size_t i = 0; i < factors.size(); ++i)
            for (std::size_t j = i + 1; j < factors.size(); ++j) {
                const std::string label = factors[i] + " " + record_value(rec, factors[i]) +
                                          " : " + factors[j] + " " +
                                          record_value(rec, factors[j]);
                ds.x(r, index.at(label)) = 1.0;
            }
        ds.y[r] = measure == AttributionMeasure::SimpleReturn ? rec.simple_return
                                                              : rec.logit_cosine;
    }
    ds.penalized.assign(static_cast<std::size_t>(p), true);
    ds.penalized[0] = false;
    return ds;
}

namespace {

double soft_threshold(double z, double lam) {
    if (z > lam) return z - lam;
    if (z < -lam) return z + lam;
    return 0.0;
}

void coordinate_descent(const Mat& x, const Vec& y, double lambda,
                        const std::vector<bool>& penalized, Vec& beta) {
    const Eigen::Index n = x.rows(), p = x.cols();
    Vec col_ss(p);
    for (Eigen::Index j = 0; j < p; ++j) col_ss[j] = x.col(j).squaredNorm() / n;

    Vec resid = y - x * beta;
    const int max_sweeps = 2000;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_ss[j] == 0.0) continue;
            const double old = beta[j];
            const double rho = x.col(j).dot(resid) / n + col_ss[j] * old;
            const double next = penalized[static_cast<std::size_t>(j)]
                                    ? soft_threshold(rho, lambda) / col_ss[j]
                                    : rho / col_ss[j];
            if (next != old) {
                resid += x.col(j) * (old - next);
                beta[j] = next;
                max_change = std::max(max_change, std::fabs(next - old));
            }
        }
        if (max_change < 1e-12) {
            // KKT check before declaring victory
            bool ok = true;
            for (Eigen::Index j = 0; j < p && ok; ++j) {
                if (col_ss[j] == 0.0) continue;
                const double g = x.col(j).dot(resid) / n;
                if (!penalized[static_cast<std::size_t>(j)]) {
                    ok = std::fabs(g) <= 1e-7;
                } else if (beta[j] == 0.0) {
                    ok = std::fabs(g) <= lambda + 1e-7;
                } else {
                    ok = std::fabs(g - lambda * (beta[j] > 0.0 ? 1.0 : -1.0)) <= 1e-7;
                }
            }
            if (ok) break;
        }
    }
}

}  // namespace

Vec lasso_fit(const Mat& x, const Vec& y, double lambda, const std::vector<bool>* penalized) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    std::vector<bool> pen = penalized ? *penalized : std::vector<bool>(x.cols(), true);
    if (pen.size() != static_cast<std::size_t>(x.cols()))
        throw std::invalid_argument("penalized mask size mismatch");
    Vec beta = Vec::Zero(x.cols());
    coordinate_descent(x, y, lambda, pen, beta);
    return beta;
}

std::vector<Vec> lasso_path(const Mat& x, const Vec& y, const std::vector<double>& grid,
                            const std::vector<bool>* penalized) {
    std::vector<bool> pen = penalized ? *penalized : std::vector<bool>(x.cols(), true);
    std::vector<Vec> path;
    path.reserve(grid.size());
    Vec beta = Vec::Zero(x.cols());
    for (double lam : grid) {
        coordinate_descent(x, y, lam, pen, beta);
        path.push_back(beta);
    }
    return path;
}

double lasso_lambda_max(const Mat& x, const Vec& y, const std::vector<bool>* penalized) {
    const Eigen::Index n = x.rows(), p = x.cols();
    std::vector<bool> pen = penalized ? *penalized : std::vector<bool>(p, true);

    // fit the unpenalized block first (typically just the intercept); a huge
    // penalty freezes every penalized column at zero
    bool any_unpen = false;
    for (std::size_t j = 0; j < pen.size(); ++j) any_unpen = any_unpen || !pen[j];
    Vec resid = y;
    if (any_unpen) {
        Vec beta0 = Vec::Zero(p);
        coordinate_descent(x, y, 1e30, pen, beta0);
        resid = y - x * beta0;
    }
    double lam = 0.0;
    for (Eigen::Index j = 0; j < p; ++j)
        if (pen[static_cast<std::size_t>(j)])
            lam = std::max(lam, std::fabs(x.col(j).dot(resid)) / n);
    return lam;
}

std::vector<double> default_lambda_grid(double lambda_max, int points, double min_ratio) {
    std::vector<double> grid;
    grid.reserve(points);
    if (lambda_max <= 0.0) return {0.0};
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        grid.push_back(lambda_max * std::pow(min_ratio, f));
    }
    return grid;
}

LassoFit lasso_cv(const Mat& x, const Vec& y, int folds, const std::vector<double>& grid,
                  const std::vector<bool>* penalized, std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    if (n < folds) throw std::invalid_argument("fewer rows than folds");
    if (grid.empty()) throw std::invalid_argument("empty lambda grid");

    // uniformly random fold assignment with a fixed seed
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        RngStream rs(substream(seed, RngPurpose::Folds));
        for (Eigen::Index i = n - 1; i > 0; --i)
            std::swap(order[i], order[rs.below(static_cast<std::uint64_t>(i + 1))]);
        for (Eigen::Index i = 0; i < n; ++i)
            fold_of[order[i]] = static_cast<int>(i % folds);
    }

    LassoFit fit;
    fit.grid = grid;
    fit.cv_mse = Mat::Zero(folds, static_cast<Eigen::Index>(grid.size()));

#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < folds; ++f) {
        Eigen::Index n_train = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (fold_of[static_cast<std::size_t>(i)] != f) ++n_train;
        Mat xtr(n_train, x.cols()), xte(n - n_train, x.cols());
        Vec ytr(n_train), yte(n - n_train);
        Eigen::Index a = 0, b = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (fold_of[static_cast<std::size_t>(i)] != f) {
                xtr.row(a) = x.row(i);
                ytr[a++] = y[i];
            } else {
                xte.row(b) = x.row(i);
                yte[b++] = y[i];
            }
        }
        bool constant_y = true;
        for (Eigen::Index i = 1; i < n_train; ++i) constant_y = constant_y && ytr[i] == ytr[0];
        if (constant_y)
            std::fprintf(stderr, "warning: fold %d has constant response\n", f);

        const auto path = lasso_path(xtr, ytr, grid, penalized);
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const Vec err = yte - xte * path[gi];
            fit.cv_mse(f, static_cast<Eigen::Index>(gi)) = err.squaredNorm() / err.size();
        }
    }

    double lambda_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
        Eigen::Index best = 0;
        for (Eigen::Index gi = 1; gi < fit.cv_mse.cols(); ++gi)
            if (fit.cv_mse(f, gi) < fit.cv_mse(f, best)) best = gi;
        lambda_sum += grid[static_cast<std::size_t>(best)];
    }
    fit.lambda_star = lambda_sum / folds;
    fit.beta = lasso_fit(x, y, fit.lambda_star, penalized);
    return fit;
}

void write_coefficient_csv(const std::string& path, const std::vector<std::string>& labels,
                           const Vec& beta, bool nonzero_only) {
    if (labels.size() != static_cast<std::size_t>(beta.size()))
        throw std::invalid_argument("label/coefficient size mismatch");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(beta.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return beta[a] > beta[b]; });
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "coefficient,value\n";
    char buf[40];
    for (Eigen::Index idx : order) {
        if (nonzero_only && beta[idx] == 0.0) continue;
        std::snprintf(buf, sizeof(buf), "%.6f", beta[idx]);
        out << labels[static_cast<std::size_t>(idx)] << ',' << buf << '\n';
    }
}

}  // namespace genport
