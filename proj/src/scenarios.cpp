#include "genport/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "genport/kernels.hpp"
#include "genport/optim.hpp"
#include "genport/rng.hpp"
#include "genport/special.hpp"

namespace genport {

namespace {

constexpr double kReturnFloor = -1.0 + 1e-9;

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

bool has_token(const std::vector<std::string>& toks, const std::string& t) {
    for (const auto& x : toks)
        if (x == t) return true;
    return false;
}

double clamp_unit(double u) { return std::clamp(u, 1e-10, 1.0 - 1e-10); }

}  // namespace

GenModelSpec parse_genmodel(const std::string& label) {
    const auto toks = split_tokens(label);
    if (toks.empty()) throw std::invalid_argument("empty generative model label");

    GenModelSpec spec;
    spec.id = label;

    if (toks[0] == "mv") {
        if (toks.size() != 2 || (toks[1] != "norm" && toks[1] != "t"))
            throw std::invalid_argument("bad mv model label: " + label);
        spec.dependence = toks[1] == "norm" ? DependenceKind::MvGaussian
                                            : DependenceKind::MvStudentT;
        spec.marginal_mode = MarginalMode::NotApplicable;
        return spec;
    }
    if (toks[0] == "dcc11") {
        if (!has_token(toks, "garch11")) throw std::invalid_argument("bad dcc label: " + label);
        spec.dependence = DependenceKind::Dcc;
        spec.error_dist = has_token(toks, "t") ? InnovationDist::StudentT
                                               : InnovationDist::Gaussian;
        spec.marginal_mode = MarginalMode::NotApplicable;
        return spec;
    }
    if (toks[0] != "p" && toks[0] != "np")
        throw std::invalid_argument("unknown generative model label: " + label);
    spec.marginal_mode = toks[0] == "p" ? MarginalMode::Parametric : MarginalMode::Empirical;
    spec.garch_prefilter = has_token(toks, "garch11");

    if (toks.size() < 3) throw std::invalid_argument("bad model label: " + label);
    if (toks[1] == "mvcop") {
        if (has_token(toks, "norm")) spec.dependence = DependenceKind::GaussCopula;
        else if (has_token(toks, "t")) spec.dependence = DependenceKind::TCopula;
        else throw std::invalid_argument("mvcop label needs norm or t: " + label);
        if (spec.dependence == DependenceKind::TCopula)
            spec.error_dist = InnovationDist::StudentT;
        return spec;
    }
    if (toks[1] == "vinecop") {
        spec.dependence = DependenceKind::Rvine;
        const std::string& preset = toks.back();
        if (preset != "elliptical" && preset != "archimedean" && preset != "allfam")
            throw std::invalid_argument("vinecop label needs a family preset: " + label);
        spec.vine_preset = preset;
        return spec;
    }
    throw std::invalid_argument("unknown generative model label: " + label);
}

const std::vector<std::string>& all_genmodel_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v = {"mv norm", "mv t"};
        for (const std::string m : {"p", "np"})
            for (const std::string k : {"norm", "t"}) {
                v.push_back(m + " mvcop " + k);
                v.push_back(m + " mvcop " + k + " garch11");
            }
        for (const std::string m : {"p", "np"})
            for (const std::string f : {"elliptical", "archimedean", "allfam"}) {
                v.push_back(m + " vinecop " + f);
                v.push_back(m + " vinecop garch11 " + f);
            }
        v.push_back("dcc11 garch11");
        v.push_back("dcc11 t garch11");
        return v;
    }();
    return ids;
}

namespace {

double mv_student_profile_nu(const Mat& centered, const Mat& cov) {
    const Eigen::Index n = centered.rows(), d = centered.cols();
    auto nll = [&](double lnv) {
        const double nu = 2.05 + std::exp(lnv);
        const Mat scatter = cov * ((nu - 2.0) / nu);
        Eigen::LLT<Mat> llt(scatter);
        if (llt.info() != Eigen::Success) return 1e300;
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vec x = centered.row(i).transpose();
            const double quad = x.dot(llt.solve(x));
            ll += std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
                  0.5 * d * std::log(nu * M_PI) - 0.5 * logdet -
                  0.5 * (nu + d) * std::log1p(quad / nu);
        }
        return -ll;
    };
    const double lnv = scan_golden_min(nll, std::log(0.5), std::log(300.0), 12, 1e-3);
    return 2.05 + std::exp(lnv);
}

}  // namespace

GenModel fit_generative(const GenModelSpec& spec, const Mat& window, int min_window) {
    if (window.rows() < min_window)
        throw std::runtime_error("genmodel '" + spec.id + "': window shorter than " +
                                 std::to_string(min_window) + " rows");
    GenModel g;
    g.spec = spec;
    g.d = static_cast<int>(window.cols());
    g.window_rows = static_cast<int>(window.rows());

    const Eigen::Index n = window.rows(), d = window.cols();

    auto stage = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            throw std::runtime_error("genmodel '" + spec.id + "' stage " + name + ": " +
                                     e.what());
        }
    };

    if (spec.dependence == DependenceKind::MvGaussian ||
        spec.dependence == DependenceKind::MvStudentT) {
        stage("moments", [&] {
            g.mu = window.colwise().mean().transpose();
            Mat centered = window.rowwise() - g.mu.transpose();
            Mat cov = (centered.transpose() * centered) / static_cast<double>(n);
            Eigen::LLT<Mat> llt(cov);
            if (llt.info() != Eigen::Success) {
                cov += 1e-10 * Mat::Identity(d, d);
                llt.compute(cov);
                if (llt.info() != Eigen::Success)
                    throw std::runtime_error("covariance not positive definite");
            }
            g.cov_chol = llt.matrixL();
            if (spec.dependence == DependenceKind::MvStudentT)
                g.mvt_nu = mv_student_profile_nu(centered, cov);
        });
        return g;
    }

    if (spec.dependence == DependenceKind::Dcc) {
        stage("garch", [&] {
            Mat eps(n, d);
            Vec mu(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                GarchModel gm = fit_garch11(window.col(j), spec.error_dist);
                eps.col(j) = garch_filter(gm, window.col(j)).z;
                mu[j] = gm.mu;
                g.garch.push_back(gm);
            }
            g.dcc = fit_dcc11(eps, spec.error_dist);
            g.dcc.garch = g.garch;
            g.dcc.mu = mu;
        });
        return g;
    }

    // copula pipeline: optional garch filter, marginal transform, dependence fit
    Mat base = window;
    if (spec.garch_prefilter) {
        stage("garch", [&] {
            Mat z(n, d);
            for (Eigen::Index j = 0; j < d; ++j) {
                GarchModel gm = fit_garch11(window.col(j), InnovationDist::Gaussian);
                z.col(j) = garch_filter(gm, window.col(j)).z;
                g.garch.push_back(gm);
            }
            base = z;
        });
    }

    Mat u(n, d);
    stage("marginals", [&] {
        const std::vector<MarginalFamily>& fams =
            spec.parametric_families.empty() ? all_parametric_families()
                                             : spec.parametric_families;
        for (Eigen::Index j = 0; j < d; ++j) {
            MarginalModel m = spec.marginal_mode == MarginalMode::Parametric
                                  ? select_marginal(base.col(j), fams)
                                  : fit_marginal(base.col(j), MarginalFamily::Empirical);
            for (Eigen::Index i = 0; i < n; ++i)
                u(i, j) = clamp_unit(marginal_cdf(m, base(i, j)));
            g.marginals.push_back(std::move(m));
        }
    });

    stage("dependence", [&] {
        switch (spec.dependence) {
            case DependenceKind::GaussCopula:
                g.elliptical = fit_elliptical_copula(u, EllipticalCopula::Kind::Gaussian);
                break;
            case DependenceKind::TCopula:
                g.elliptical = fit_elliptical_copula(u, EllipticalCopula::Kind::StudentT);
                break;
            case DependenceKind::Rvine: {
                BicopFamilySet fams = BicopFamilySet::from_name(spec.vine_preset);
                if (!spec.vine_include_joe)
                    std::erase(fams.families, BicopFamily::Joe);
                g.vine = fit_rvine(u, fams);
                break;
            }
            default:
                throw std::logic_error("unexpected dependence kind");
        }
    });
    return g;
}

ScenarioMatrix simulate_returns(const GenModel& model, int n, std::uint64_t seed) {
    if (n < 100) throw std::invalid_argument("need at least 100 scenarios");
    const int d = model.d;
    ScenarioMatrix s;
    s.model_id = model.spec.id;
    s.seed = seed;
    s.values.resize(n, d);

    switch (model.spec.dependence) {
        case DependenceKind::MvGaussian: {
#pragma omp parallel for schedule(static)
            for (int i = 0; i < n; ++i) {
                RngStream rs(substream(seed, RngPurpose::Scenario, static_cast<std::uint64_t>(i)));
                Vec z(d);
                for (int k = 0; k < d; ++k) z[k] = rs.normal();
                s.values.row(i) = (model.mu + model.cov_chol * z).transpose();
            }
            break;
        }
        case DependenceKind::MvStudentT: {
            const double nu = model.mvt_nu;
            const double shrink = std::sqrt((nu - 2.0) / nu);
#pragma omp parallel for schedule(static)
            for (int i = 0; i < n; ++i) {
                RngStream rs(substream(seed, RngPurpose::Scenario, static_cast<std::uint64_t>(i)));
                Vec z(d);
                for (int k = 0; k < d; ++k) z[k] = rs.normal();
                const double w = chi2_ppf(rs.uniform(), nu);
                const double mix = shrink / std::sqrt(w / nu);
                s.values.row(i) = (model.mu + model.cov_chol * z * mix).transpose();
            }
            break;
        }
        case DependenceKind::Dcc: {
            s.values = simulate_dcc(model.dcc, n, seed);
            break;
        }
        case DependenceKind::GaussCopula:
        case DependenceKind::TCopula:
        case DependenceKind::Rvine: {
            const Mat u = model.spec.dependence == DependenceKind::Rvine
                              ? sample_rvine(model.vine, n, seed)
                              : sample_elliptical_copula(model.elliptical, n, seed);
#pragma omp parallel for schedule(static)
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < d; ++k) {
                    double z = marginal_ppf(model.marginals[k], clamp_unit(u(i, k)));
                    if (!model.garch.empty()) {
                        const GarchModel& gm = model.garch[k];
                        z = gm.mu + std::sqrt(gm.forecast_variance()) * z;
                    }
                    s.values(i, k) = z;
                }
            }
            break;
        }
    }

    int clamped = 0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k)
            if (s.values(i, k) < kReturnFloor) {
                s.values(i, k) = kReturnFloor;
                ++clamped;
            }
    s.clamped = clamped;
    return s;
}

void save_scenarios(const ScenarioMatrix& s, const std::string& path_base) {
    std::ofstream bin(path_base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot write " + path_base + ".bin");
    for (Eigen::Index i = 0; i < s.values.rows(); ++i)
        for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
            const double v = s.values(i, j);
            bin.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    nlohmann::json sidecar{{"model_id", s.model_id},
                           {"asof", s.asof},
                           {"N", s.values.rows()},
                           {"D", s.values.cols()},
                           {"seed", s.seed}};
    std::ofstream js(path_base + ".json");
    js << sidecar.dump(2) << '\n';
}

ScenarioMatrix load_scenarios(const std::string& path_base) {
    std::ifstream js(path_base + ".json");
    if (!js) throw std::runtime_error("cannot read " + path_base + ".json");
    nlohmann::json sidecar;
    js >> sidecar;
    ScenarioMatrix s;
    s.model_id = sidecar.at("model_id");
    s.asof = sidecar.at("asof");
    s.seed = sidecar.at("seed");
    const Eigen::Index n = sidecar.at("N"), d = sidecar.at("D");
    s.values.resize(n, d);
    std::ifstream bin(path_base + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot read " + path_base + ".bin");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            double v;
            bin.read(reinterpret_cast<char*>(&v), sizeof(v));
            s.values(i, j) = v;
        }
    return s;
}

}  // namespace genport
