#include "genport/backtest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "genport/optimizer.hpp"
#include "genport/rng.hpp"
#include "genport/special.hpp"

namespace genport {

namespace {

constexpr double kTurnoverClamp = 1e-9;

std::string format_v(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string format_gamma(double g) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", g);
    return buf;
}

}  // namespace

std::string ArmSpec::id() const {
    return genmodel + " | " + objective_label(objective) + " | TCAvs " + format_v(v);
}

std::string BanditConfig::id() const {
    return similarity_label(similarity) + " | " + activation_label(activation) + " | " +
           format_gamma(gamma) + " | " + policy_label(policy);
}

StepMeasures step_measures(const Vec& w0, const Vec& w1_pre, const Vec& realized, double c) {
    StepMeasures m{};
    m.r_p = w0.dot(realized) - c * (w0 - w1_pre).cwiseAbs().sum();

    double cosv = 0.0;
    const double wn = w0.norm(), rn = realized.norm();
    if (wn > 0.0 && rn > 0.0) cosv = w0.dot(realized) / (wn * rn);
    cosv = std::clamp(cosv, -1.0 + 2e-12, 1.0 - 2e-12);
    // log1p(c) - log1p(-c) = logit((1+c)/2); exactly antisymmetric in c
    m.logit_cosine = logit_half_shift(cosv);

    const double turn = std::clamp((w0 - w1_pre).cwiseAbs().sum() / 2.0, kTurnoverClamp,
                                   1.0 - kTurnoverClamp);
    m.logit_turnover = logit(turn);
    return m;
}

Vec drift_weights(const Vec& w0, const Vec& realized) {
    double value = 1.0 + w0.dot(realized);
    if (value < 1e-9) value = 1e-9;  // a blown-up book still needs defined weights
    Vec w1(w0.size());
    for (Eigen::Index i = 0; i < w0.size(); ++i)
        w1[i] = w0[i] * (1.0 + realized[i]) / value;
    return w1;
}

namespace {

std::vector<StepRecord> run_single_arm(const BacktestConfig& cfg, const ReturnPanel& panel,
                                       const ArmSpec& arm, std::uint64_t seed) {
    const Eigen::Index t_total = panel.steps();
    const Eigen::Index d = panel.n_assets();
    if (t_total < cfg.fit_window + 1)
        throw std::invalid_argument("panel shorter than one fit window plus a step");

    GenModelSpec spec = parse_genmodel(arm.genmodel);
    spec.parametric_families = cfg.parametric_families;
    spec.vine_include_joe = cfg.vine_include_joe;

    std::vector<StepRecord> records;
    records.reserve(t_total - cfg.fit_window);

    Vec w1 = Vec::Constant(d, 1.0 / d);
    Vec prev_w0 = w1;
    double wealth = 1.0;

    for (Eigen::Index t = cfg.fit_window; t < t_total; ++t) {
        StepRecord rec;
        rec.row = static_cast<int>(t);
        rec.t = panel.timestamps[t];
        rec.w1 = w1;

        Vec w0;
        if (arm.objective.tag == ObjectiveTag::LongParity ||
            arm.objective.tag == ObjectiveTag::ShortParity) {
            // closed form, no forecast needed
            const double sign = arm.objective.tag == ObjectiveTag::LongParity ? 1.0 : -1.0;
            w0 = Vec::Constant(d, sign / d);
        } else {
            const Mat window = panel.returns.middleRows(t - cfg.fit_window, cfg.fit_window);
            try {
                const GenModel model = fit_generative(spec, window, cfg.fit_window);
                const ScenarioMatrix scen = simulate_returns(
                    model, cfg.n_scenarios,
                    substream(seed, static_cast<std::uint64_t>(t), RngPurpose::Scenario));
                ObjectiveContext ctx{scen.values, w1, cfg.c, arm.v,
                                     cfg.bernado_ledoit_classical};
                const SolveReport rep = solve_weights(
                    arm.objective, ctx, cfg.m,
                    substream(seed, static_cast<std::uint64_t>(t), RngPurpose::Optimizer));
                w0 = rep.w_star;
            } catch (const std::exception&) {
                w0 = prev_w0;  // carry previous weights, flag the step
                rec.fit_failed = true;
            }
        }

        const Vec realized = panel.returns.row(t).transpose();
        const StepMeasures m = step_measures(w0, w1, realized, cfg.c);
        rec.w0 = w0;
        rec.r_p = m.r_p;
        rec.logit_cosine = m.logit_cosine;
        rec.logit_turnover = m.logit_turnover;
        wealth *= 1.0 + m.r_p;
        rec.wealth = wealth;
        records.push_back(std::move(rec));

        w1 = drift_weights(w0, realized);
        prev_w0 = w0;
    }
    return records;
}

}  // namespace

std::vector<FixedPath> run_fixed_backtest(const BacktestConfig& cfg, const ReturnPanel& panel,
                                          const std::vector<ArmSpec>& arms,
                                          const std::vector<std::uint64_t>& seeds) {
    std::vector<FixedPath> paths(arms.size() * seeds.size());
    const Eigen::Index n_jobs = static_cast<Eigen::Index>(paths.size());
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index job = 0; job < n_jobs; ++job) {
        const std::size_t ai = static_cast<std::size_t>(job) / seeds.size();
        const std::size_t si = static_cast<std::size_t>(job) % seeds.size();
        FixedPath p;
        p.arm = arms[ai];
        p.seed = seeds[si];
        p.records = run_single_arm(cfg, panel, arms[ai], seeds[si]);
        paths[job] = std::move(p);
    }
    return paths;
}

std::vector<EclecticPath> run_eclectic_backtest(const BacktestConfig& cfg,
                                                const ReturnPanel& panel,
                                                const std::vector<FixedPath>& fixed,
                                                const std::vector<BanditConfig>& bandits) {
    if (fixed.empty()) throw std::invalid_argument("no fixed-arm paths supplied");
    const Eigen::Index d = panel.n_assets();

    // group fixed paths by seed, preserving arm order
    std::vector<std::uint64_t> seeds;
    for (const auto& p : fixed) {
        bool seen = false;
        for (auto s : seeds) seen = seen || s == p.seed;
        if (!seen) seeds.push_back(p.seed);
    }

    std::vector<EclecticPath> out(bandits.size() * seeds.size());
    const Eigen::Index n_jobs = static_cast<Eigen::Index>(out.size());
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index job = 0; job < n_jobs; ++job) {
        const std::size_t bi = static_cast<std::size_t>(job) / seeds.size();
        const std::size_t si = static_cast<std::size_t>(job) % seeds.size();
        const BanditConfig& bc = bandits[bi];

        std::vector<const FixedPath*> arms;
        for (const auto& p : fixed)
            if (p.seed == seeds[si]) arms.push_back(&p);
        const int n_arms = static_cast<int>(arms.size());
        const std::size_t n_steps = arms[0]->records.size();
        for (const auto* a : arms)
            if (a->records.size() != n_steps)
                throw std::logic_error("fixed-arm record series disagree in length");

        EclecticPath path;
        path.bandit = bc;
        path.seed = seeds[si];
        path.records.reserve(n_steps);

        Vec w1 = Vec::Constant(d, 1.0 / d);
        double wealth = 1.0;

        for (std::size_t k = 0; k < n_steps; ++k) {
            const int row = arms[0]->records[k].row;

            Vec psi;
            const std::size_t lo = k > static_cast<std::size_t>(bc.window)
                                       ? k - static_cast<std::size_t>(bc.window)
                                       : 0;
            const std::size_t n_hist = k - lo;
            if (n_hist < 2) {
                psi = Vec::Constant(n_arms, 1.0 / n_arms);
            } else {
                Mat pi(static_cast<Eigen::Index>(n_hist), n_arms);
                for (std::size_t tau = lo; tau < k; ++tau) {
                    const Vec realized = panel.returns.row(arms[0]->records[tau].row).transpose();
                    Vec s(n_arms);
                    for (int p = 0; p < n_arms; ++p)
                        s[p] = similarity(bc.similarity, arms[p]->records[tau].w0, realized);
                    pi.row(static_cast<Eigen::Index>(tau - lo)) =
                        optimality(bc.activation, s, cfg.leaky_relu_verbatim).transpose();
                }
                OptimalityHistory hist{pi};
                Vec theta(n_arms);
                if (bc.activation == ActivationKind::Maxout) {
                    if (bc.policy == PolicyKind::Blend) {
                        theta = wmle_categorical(hist, bc.gamma);
                    } else {
                        for (int p = 0; p < n_arms; ++p)
                            theta[p] = wmle_bernoulli(pi.col(p), bc.gamma);
                    }
                } else {
                    if (bc.policy == PolicyKind::Blend) {
                        theta = wmle_dirichlet(hist, bc.gamma);
                    } else {
                        for (int p = 0; p < n_arms; ++p)
                            theta[p] = wmle_beta(pi.col(p), bc.gamma).theta;
                    }
                }
                psi = policy_ratio(theta, bc.policy);
            }

            std::vector<Vec> arm_w0(n_arms);
            for (int p = 0; p < n_arms; ++p) arm_w0[p] = arms[p]->records[k].w0;
            const Vec w0 = eclectic_weights(psi, arm_w0);

            const Vec realized = panel.returns.row(row).transpose();
            const StepMeasures m = step_measures(w0, w1, realized, cfg.c);

            StepRecord rec;
            rec.row = row;
            rec.t = arms[0]->records[k].t;
            rec.w0 = w0;
            rec.w1 = w1;
            rec.psi = psi;
            rec.r_p = m.r_p;
            rec.logit_cosine = m.logit_cosine;
            rec.logit_turnover = m.logit_turnover;
            wealth *= 1.0 + m.r_p;
            rec.wealth = wealth;
            path.records.push_back(std::move(rec));

            w1 = drift_weights(w0, realized);
        }
        out[job] = std::move(path);
    }
    return out;
}

std::vector<StepRecord> benchmark_path(const ReturnPanel& panel, int start_row) {
    const Eigen::Index d = panel.n_assets();
    const Vec w0 = Vec::Constant(d, 1.0 / d);
    Vec w1 = w0;
    double wealth = 1.0;
    std::vector<StepRecord> records;
    for (Eigen::Index t = start_row; t < panel.steps(); ++t) {
        const Vec realized = panel.returns.row(t).transpose();
        const StepMeasures m = step_measures(w0, w1, realized, 0.0);
        StepRecord rec;
        rec.row = static_cast<int>(t);
        rec.t = panel.timestamps[t];
        rec.w0 = w0;
        rec.w1 = w1;
        rec.r_p = m.r_p;
        rec.logit_cosine = m.logit_cosine;
        rec.logit_turnover = m.logit_turnover;
        wealth *= 1.0 + m.r_p;
        rec.wealth = wealth;
        records.push_back(std::move(rec));
        w1 = drift_weights(w0, realized);
    }
    return records;
}

namespace {

void write_step_row(std::ofstream& out, const StepRecord& r) {
    char buf[40];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    num(r.r_p);
    num(r.logit_cosine);
    num(r.logit_turnover);
    num(r.wealth);
    for (Eigen::Index i = 0; i < r.psi.size(); ++i) num(r.psi[i]);
    for (Eigen::Index i = 0; i < r.w0.size(); ++i) num(r.w0[i]);
    out << '\n';
}

}  // namespace

void write_fixed_csv(const std::string& path, const FixedPath& p,
                     const std::vector<std::string>& assets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "timestamp,genmodel,objective,tcav,seed,r_p,logit_cosine,logit_turnover,wealth";
    for (const auto& a : assets) out << ",w0_" << a;
    out << '\n';
    for (const auto& r : p.records) {
        out << format_rfc3339(r.t) << ',' << p.arm.genmodel << ','
            << objective_label(p.arm.objective) << ',' << format_v(p.arm.v) << ',' << p.seed;
        write_step_row(out, r);
    }
}

void write_eclectic_csv(const std::string& path, const EclecticPath& p,
                        const std::vector<std::string>& assets) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::size_t n_arms = p.records.empty() ? 0 : p.records.front().psi.size();
    out << "timestamp,simimtd,actfun,decay,bldmtd,seed,r_p,logit_cosine,logit_turnover,wealth";
    for (std::size_t i = 0; i < n_arms; ++i) out << ",psi_" << i;
    for (const auto& a : assets) out << ",w0_" << a;
    out << '\n';
    for (const auto& r : p.records) {
        out << format_rfc3339(r.t) << ',' << similarity_label(p.bandit.similarity) << ','
            << activation_label(p.bandit.activation) << ',' << format_gamma(p.bandit.gamma)
            << ',' << policy_label(p.bandit.policy) << ',' << p.seed;
        write_step_row(out, r);
    }
}

}  // namespace genport
