#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "genport/copula.hpp"
#include "genport/marginals.hpp"
#include "genport/rvine.hpp"
#include "genport/volatility.hpp"

namespace genport {

enum class DependenceKind { MvGaussian, MvStudentT, GaussCopula, TCopula, Rvine, Dcc };
enum class MarginalMode { Parametric, Empirical, NotApplicable };

struct GenModelSpec {
    std::string id;
    DependenceKind dependence = DependenceKind::MvGaussian;
    MarginalMode marginal_mode = MarginalMode::NotApplicable;
    bool garch_prefilter = false;
    std::string vine_preset = "allfam";  // Rvine only
    bool vine_include_joe = true;
    InnovationDist error_dist = InnovationDist::Gaussian;  // Dcc errors / t-copula flavor
    std::vector<MarginalFamily> parametric_families;       // empty = all parametric
};

// Labels follow the attribution tables: "mv norm", "p vinecop archimedean",
// "np mvcop norm garch11", "dcc11 t garch11", ...
GenModelSpec parse_genmodel(const std::string& label);
const std::vector<std::string>& all_genmodel_ids();

struct GenModel {
    GenModelSpec spec;
    int d = 0;
    int window_rows = 0;

    // mv distributions
    Vec mu;
    Mat cov_chol;  // lower factor of the sample covariance
    double mvt_nu = 8.0;

    // garch prefilter state (also used for reinflation)
    std::vector<GarchModel> garch;

    // per-asset marginals on returns or on standardized residuals
    std::vector<MarginalModel> marginals;

    // dependence layer
    EllipticalCopula elliptical;
    RvineModel vine;
    DccModel dcc;
};

struct ScenarioMatrix {
    Mat values;  // N x D simulated one-step simple returns, all > -1
    std::string model_id;
    std::int64_t asof = 0;
    std::uint64_t seed = 0;
    int clamped = 0;  // draws pushed back above -1
};

// window: rows x D simple returns, most recent row last.
GenModel fit_generative(const GenModelSpec& spec, const Mat& window, int min_window = 91);

ScenarioMatrix simulate_returns(const GenModel& model, int n, std::uint64_t seed);

// binary f64 row-major payload plus a JSON sidecar
void save_scenarios(const ScenarioMatrix& s, const std::string& path_base);
ScenarioMatrix load_scenarios(const std::string& path_base);

}  // namespace genport
