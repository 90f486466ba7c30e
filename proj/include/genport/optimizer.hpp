#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "genport/objectives.hpp"

namespace genport {

// Feasible set of Eq-style weight vectors: ||w||_1 = 1 and |w_d| <= m/D.
// Realized by iterated clamp-and-rescale until a fixed point.
Vec project_feasible(const Vec& z, double box_multiplier);

bool weights_feasible(const Vec& w, double box_multiplier, double l1_tol = 1e-6,
                      double box_tol = 1e-9);

struct SolveReport {
    Vec w_star;
    double objective_value = 0.0;
    int n_restarts = 0;
    bool converged = false;
    bool fallback = false;  // every start hit the Kelly sentinel
    double wall_time_s = 0.0;
};

// Multi-start projected Nelder-Mead over the unconstrained pre-image; the
// solver only consumes the objective value, so nonsmooth objectives
// (quantiles, L1 cost) are fine. Long/short parity short-circuit to their
// closed forms.
SolveReport solve_weights(const ObjectiveKind& kind, const ObjectiveContext& ctx,
                          double box_multiplier, std::uint64_t seed);

nlohmann::json solve_report_to_json(const SolveReport& rep);

}  // namespace genport
