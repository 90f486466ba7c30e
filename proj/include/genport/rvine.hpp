#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "genport/copula.hpp"

namespace genport {

// One pair copula in the vine. var_a / var_b is the conditioned pair; cond
// the conditioning set. Children point at the previous tree's edges that
// supply the two conditional-CDF inputs (tree 1 reads the base columns).
struct RvineEdge {
    int var_a = -1;
    int var_b = -1;
    std::vector<int> cond;        // sorted
    std::vector<int> constraint;  // sorted union of conditioned pair and cond
    BicopModel pc;                // fitted on (F(a|cond), F(b|cond))
    int child_a = -1;
    int child_b = -1;
    bool child_a_is_a = true;  // which output of the child carries F(var_a|cond)
    bool child_b_is_a = true;
    double tau = 0.0;
    bool degenerate = false;
};

struct RvineModel {
    int d = 0;
    std::vector<std::vector<RvineEdge>> trees;  // trees[k] has d-k-1 edges

    // sampling order, built by peeling the structure
    struct Cell {
        int tree = -1;
        int index = -1;
        bool diag_is_a = false;
    };
    std::vector<int> diag;                 // diag[j] = variable sampled in column j
    std::vector<std::vector<Cell>> cells;  // cells[j][i-j-1] for i in (j, d)
};

// Tree 1 is the maximum spanning tree on |tau|; higher trees are built on
// h-transformed pseudo-data under the proximity condition.
RvineModel fit_rvine(const Mat& u, const BicopFamilySet& families);

// Inverse Rosenblatt applied to iid uniforms, one substream per row.
Mat sample_rvine(const RvineModel& m, int n, std::uint64_t seed);

// Forward Rosenblatt: exact inverse of sample_rvine's mapping, returning
// the driving uniforms.
Mat rvine_rosenblatt(const RvineModel& m, const Mat& u);

// Structural checks: edge counts per tree and the proximity condition.
bool rvine_structure_valid(const RvineModel& m);

nlohmann::json rvine_to_json(const RvineModel& m);
RvineModel rvine_from_json(const nlohmann::json& j);

}  // namespace genport
