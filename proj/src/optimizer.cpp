#include "genport/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "genport/optim.hpp"
#include "genport/rng.hpp"

namespace genport {

Vec project_feasible(const Vec& z, double box_multiplier) {
    const Eigen::Index d = z.size();
    const double box = box_multiplier / static_cast<double>(d);
    if (z.cwiseAbs().sum() == 0.0) return Vec::Constant(d, 1.0 / d);

    Vec w = z;
    for (int it = 0; it < 100; ++it) {
        Vec next = w.cwiseMax(-box).cwiseMin(box);
        const double l1 = next.cwiseAbs().sum();
        if (l1 == 0.0) return Vec::Constant(d, 1.0 / d);
        next /= l1;
        if ((next - w).cwiseAbs().maxCoeff() < 1e-9) {
            w = next;
            break;
        }
        w = next;
    }
    // final clamp wins when box < 1/D makes the pair infeasible (m < 1)
    Vec out = w.cwiseMax(-box).cwiseMin(box);
    const double l1 = out.cwiseAbs().sum();
    return l1 > 0.0 && std::fabs(l1 - 1.0) < 1e-9 ? Vec(out / l1) : out;
}

bool weights_feasible(const Vec& w, double box_multiplier, double l1_tol, double box_tol) {
    const double box = box_multiplier / static_cast<double>(w.size());
    if (std::fabs(w.cwiseAbs().sum() - 1.0) > l1_tol) return false;
    return (w.cwiseAbs().array() <= box + box_tol).all();
}

namespace {

// ties between exact optima (e.g. w and -w under a symmetric objective)
// break toward the lexicographically greater vector
bool lex_greater(const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return true;
        if (a[i] < b[i]) return false;
    }
    return false;
}

}  // namespace

SolveReport solve_weights(const ObjectiveKind& kind, const ObjectiveContext& ctx,
                          double box_multiplier, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index d = ctx.scenarios.cols();
    SolveReport rep;

    if (kind.tag == ObjectiveTag::LongParity || kind.tag == ObjectiveTag::ShortParity) {
        const double sign = kind.tag == ObjectiveTag::LongParity ? 1.0 : -1.0;
        rep.w_star = Vec::Constant(d, sign / d);
        rep.objective_value = evaluate_objective(kind, rep.w_star, ctx);
        rep.converged = true;
        rep.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    }

    std::vector<Vec> starts;
    starts.push_back(project_feasible(ctx.w1, box_multiplier));
    starts.push_back(Vec::Constant(d, 1.0 / d));
    starts.push_back(Vec::Constant(d, -1.0 / d));
    for (int k = 0; k < 8; ++k) {
        RngStream rs(substream(seed, RngPurpose::Optimizer, static_cast<std::uint64_t>(k)));
        Vec z(d);
        for (Eigen::Index i = 0; i < d; ++i) z[i] = rs.normal();
        starts.push_back(project_feasible(z, box_multiplier));
    }
    rep.n_restarts = static_cast<int>(starts.size());

    struct Outcome {
        Vec w;
        double value = -std::numeric_limits<double>::infinity();
        bool converged = false;
    };
    std::vector<Outcome> outcomes(starts.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < starts.size(); ++s) {
        auto neg = [&](const Vec& z) {
            return -evaluate_objective(kind, project_feasible(z, box_multiplier), ctx);
        };
        NelderMeadOptions opt;
        opt.max_evals = 2000;
        opt.xtol = 1e-7;
        opt.init_step = 0.25;
        const NelderMeadResult nm = nelder_mead(neg, starts[s], opt);
        Outcome& o = outcomes[s];
        o.w = project_feasible(nm.x, box_multiplier);
        o.value = evaluate_objective(kind, o.w, ctx);
        o.converged = nm.converged;
        // the start itself may beat the polished point when NM stalled
        const double v0 = evaluate_objective(kind, starts[s], ctx);
        if (v0 > o.value) {
            o.w = starts[s];
            o.value = v0;
        }
    }

    int best = -1;
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        if (!std::isfinite(outcomes[s].value)) continue;
        if (best < 0 || outcomes[s].value > outcomes[best].value ||
            (outcomes[s].value == outcomes[best].value && lex_greater(outcomes[s].w, outcomes[best].w)))
            best = static_cast<int>(s);
    }

    if (best < 0) {
        rep.w_star = Vec::Constant(d, 1.0 / d);
        rep.objective_value = evaluate_objective(kind, rep.w_star, ctx);
        rep.fallback = true;
        rep.converged = false;
    } else {
        rep.w_star = outcomes[best].w;
        rep.objective_value = outcomes[best].value;
        rep.converged = outcomes[best].converged;
        // sign-symmetric objectives (variance at c = 0) leave +-w tied; take
        // the mirror when it is no worse and lexicographically greater
        const Vec mirrored = project_feasible(-rep.w_star, box_multiplier);
        const double vm = evaluate_objective(kind, mirrored, ctx);
        const double tie = 1e-12 * std::max(1.0, std::fabs(rep.objective_value));
        if (std::isfinite(vm) &&
            (vm > rep.objective_value + tie ||
             (std::fabs(vm - rep.objective_value) <= tie && lex_greater(mirrored, rep.w_star)))) {
            rep.w_star = mirrored;
            rep.objective_value = vm;
        }
    }
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

nlohmann::json solve_report_to_json(const SolveReport& rep) {
    return nlohmann::json{
        {"w_star", std::vector<double>(rep.w_star.data(), rep.w_star.data() + rep.w_star.size())},
        {"objective_value", rep.objective_value},
        {"n_restarts", rep.n_restarts},
        {"converged", rep.converged},
        {"fallback", rep.fallback},
        {"wall_time_s", rep.wall_time_s}};
}

}  // namespace genport
