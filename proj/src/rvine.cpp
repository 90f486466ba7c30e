#include "genport/rvine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "genport/kernels.hpp"
#include "genport/rng.hpp"

namespace genport {

namespace {

std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> sorted_diff(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<int> sorted_intersect(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// working node during construction: constraint set plus the two pseudo-data
// columns it can hand to the next tree
struct WorkNode {
    std::vector<int> constraint;
    int end_a = -1, end_b = -1;  // endpoints in the previous tree's node space
    Vec col_a, col_b;            // F(var_a | rest), F(var_b | rest)
    int var_a = -1, var_b = -1;
};

// deterministic maximum spanning tree (Prim) over |weight|
std::vector<std::pair<int, int>> max_spanning_tree(int m,
                                                   const Mat& weight,
                                                   const std::vector<std::vector<bool>>& allowed) {
    std::vector<bool> joined(m, false);
    joined[0] = true;
    std::vector<std::pair<int, int>> edges;
    for (int step = 1; step < m; ++step) {
        double best_w = -1.0;
        int best_i = -1, best_j = -1;
        for (int i = 0; i < m; ++i) {
            if (!joined[i]) continue;
            for (int j = 0; j < m; ++j) {
                if (joined[j] || !allowed[i][j]) continue;
                const double w = std::fabs(weight(i, j));
                const int lo = std::min(i, j), hi = std::max(i, j);
                const int blo = std::min(best_i, best_j), bhi = std::max(best_i, best_j);
                if (w > best_w ||
                    (w == best_w && (lo < blo || (lo == blo && hi < bhi)))) {
                    best_w = w;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_j < 0) throw std::runtime_error("vine tree is disconnected");
        joined[best_j] = true;
        edges.emplace_back(best_i, best_j);
    }
    return edges;
}

bool column_degenerate(const Vec& c) {
    for (Eigen::Index i = 1; i < c.size(); ++i)
        if (c[i] != c[0]) return false;
    return true;
}

void build_cells(RvineModel& model) {
    // Peels one variable per column: the conditioned variable of the top
    // live edge traces a unique path of live edges down the trees (it sits
    // in the conditioned pair of exactly one unremoved edge per level).
    const int d = model.d;
    model.diag.assign(d, -1);
    model.cells.assign(d, {});
    std::vector<std::vector<bool>> removed(model.trees.size());
    for (std::size_t t = 0; t < model.trees.size(); ++t)
        removed[t].assign(model.trees[t].size(), false);

    std::vector<bool> used_var(d, false);
    for (int j = 0; j <= d - 2; ++j) {
        const int top = d - 2 - j;  // tree index of the highest live level
        int start = -1;
        for (std::size_t e = 0; e < model.trees[top].size(); ++e)
            if (!removed[top][e]) { start = static_cast<int>(e); break; }
        if (start < 0) throw std::logic_error("vine peeling lost an edge");

        const int a = model.trees[top][start].var_a;
        model.diag[j] = a;
        used_var[a] = true;
        model.cells[j].reserve(d - 1 - j);

        for (int tree = top; tree >= 0; --tree) {
            int index = -1;
            for (std::size_t e = 0; e < model.trees[tree].size(); ++e) {
                if (removed[tree][e]) continue;
                const RvineEdge& edge = model.trees[tree][e];
                if (edge.var_a == a || edge.var_b == a) {
                    if (index >= 0)
                        throw std::logic_error("vine peeling path is not unique");
                    index = static_cast<int>(e);
                }
            }
            if (index < 0) throw std::logic_error("vine peeling path broke");
            RvineModel::Cell cell;
            cell.tree = tree;
            cell.index = index;
            cell.diag_is_a = model.trees[tree][index].var_a == a;
            model.cells[j].push_back(cell);
            removed[tree][index] = true;
        }
    }
    for (int v = 0; v < d; ++v)
        if (!used_var[v]) model.diag[d - 1] = v;
}

// per-row lazy evaluation of every edge's two conditional outputs
struct RowWorkspace {
    const RvineModel& model;
    std::vector<int> offset;  // global edge index base per tree
    std::vector<double> val_a, val_b;
    std::vector<char> have_a, have_b;
    Vec u;

    explicit RowWorkspace(const RvineModel& m) : model(m), u(m.d) {
        offset.resize(m.trees.size());
        int total = 0;
        for (std::size_t t = 0; t < m.trees.size(); ++t) {
            offset[t] = total;
            total += static_cast<int>(m.trees[t].size());
        }
        val_a.assign(total, 0.0);
        val_b.assign(total, 0.0);
        have_a.assign(total, 0);
        have_b.assign(total, 0);
    }

    void reset() {
        std::fill(have_a.begin(), have_a.end(), 0);
        std::fill(have_b.begin(), have_b.end(), 0);
    }

    double input(int tree, int index, bool a_side) {
        const RvineEdge& e = model.trees[tree][index];
        if (tree == 0) return u[a_side ? e.var_a : e.var_b];
        const int child = a_side ? e.child_a : e.child_b;
        const bool child_is_a = a_side ? e.child_a_is_a : e.child_b_is_a;
        return output(tree - 1, child, child_is_a);
    }

    double output(int tree, int index, bool a_side) {
        const int gi = offset[tree] + index;
        if (a_side ? have_a[gi] : have_b[gi]) return a_side ? val_a[gi] : val_b[gi];
        const RvineEdge& e = model.trees[tree][index];
        const double in_a = input(tree, index, true);
        const double in_b = input(tree, index, false);
        val_a[gi] = bicop_hfunc2(e.pc, in_a, in_b);  // F(a | cond u {b})
        val_b[gi] = bicop_hfunc1(e.pc, in_a, in_b);  // F(b | cond u {a})
        have_a[gi] = have_b[gi] = 1;
        return a_side ? val_a[gi] : val_b[gi];
    }
};

}  // namespace

RvineModel fit_rvine(const Mat& u, const BicopFamilySet& families) {
    const Eigen::Index n = u.rows();
    const int d = static_cast<int>(u.cols());
    if (d < 2) throw std::invalid_argument("fit_rvine needs D >= 2");
    // rolling fit windows can be as short as 91 rows; the pair-copula MLE
    // floor of 30 rows is the binding requirement
    if (n < 30) throw std::invalid_argument("fit_rvine needs n >= 30");

    RvineModel model;
    model.d = d;

    std::vector<WorkNode> nodes(d);
    for (int v = 0; v < d; ++v) {
        nodes[v].constraint = {v};
        nodes[v].var_a = v;
        nodes[v].col_a = u.col(v);
    }

    for (int level = 1; level <= d - 1; ++level) {
        const int m = static_cast<int>(nodes.size());
        Mat weight = Mat::Zero(m, m);
        std::vector<std::vector<bool>> allowed(m, std::vector<bool>(m, false));
        // candidate data columns for each admissible pair
        std::vector<std::vector<std::pair<Vec, Vec>>> cols;
        struct PairInfo {
            int x = -1, y = -1;
            bool x_is_a = true, y_is_a = true;
        };
        std::vector<std::vector<PairInfo>> info(m, std::vector<PairInfo>(m));

        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                bool prox;
                if (level == 1) {
                    prox = true;
                } else {
                    prox = nodes[i].end_a == nodes[j].end_a || nodes[i].end_a == nodes[j].end_b ||
                           nodes[i].end_b == nodes[j].end_a || nodes[i].end_b == nodes[j].end_b;
                }
                if (!prox) continue;

                Vec cx, cy;
                PairInfo pi;
                if (level == 1) {
                    pi.x = nodes[i].var_a;
                    pi.y = nodes[j].var_a;
                    cx = nodes[i].col_a;
                    cy = nodes[j].col_a;
                } else {
                    const auto dx = sorted_diff(nodes[i].constraint, nodes[j].constraint);
                    const auto dy = sorted_diff(nodes[j].constraint, nodes[i].constraint);
                    if (dx.size() != 1 || dy.size() != 1) continue;
                    pi.x = dx[0];
                    pi.y = dy[0];
                    pi.x_is_a = pi.x == nodes[i].var_a;
                    pi.y_is_a = pi.y == nodes[j].var_a;
                    cx = pi.x_is_a ? nodes[i].col_a : nodes[i].col_b;
                    cy = pi.y_is_a ? nodes[j].col_a : nodes[j].col_b;
                }
                allowed[i][j] = allowed[j][i] = true;
                bool degen = false;
                const double t = kendall_tau(cx, cy, &degen);
                weight(i, j) = weight(j, i) = degen ? 0.0 : t;
                info[i][j] = pi;
            }
        }

        const auto mst = max_spanning_tree(m, weight, allowed);

        std::vector<RvineEdge> tree;
        std::vector<WorkNode> next_nodes;
        tree.reserve(mst.size());
        for (auto [i, j] : mst) {
            if (i > j) std::swap(i, j);
            const PairInfo& pi = info[i][j];

            RvineEdge e;
            e.var_a = pi.x;
            e.var_b = pi.y;
            e.cond = sorted_intersect(nodes[i].constraint, nodes[j].constraint);
            e.constraint = sorted_union(nodes[i].constraint, nodes[j].constraint);
            e.child_a = i;
            e.child_b = j;
            e.child_a_is_a = pi.x_is_a;
            e.child_b_is_a = pi.y_is_a;

            const Vec& cx = level == 1 ? nodes[i].col_a : (pi.x_is_a ? nodes[i].col_a : nodes[i].col_b);
            const Vec& cy = level == 1 ? nodes[j].col_a : (pi.y_is_a ? nodes[j].col_a : nodes[j].col_b);
            e.degenerate = column_degenerate(cx) || column_degenerate(cy);
            e.tau = e.degenerate ? 0.0 : kendall_tau(cx, cy);

            if (e.degenerate) {
                e.pc = BicopModel{};  // independence
                e.pc.fit_failed = true;
            } else {
                Mat uv(n, 2);
                uv.col(0) = cx;
                uv.col(1) = cy;
                e.pc = fit_bicop(uv, families);
            }

            if (level < d - 1) {
                WorkNode wn;
                wn.constraint = e.constraint;
                wn.end_a = i;
                wn.end_b = j;
                wn.var_a = e.var_a;
                wn.var_b = e.var_b;
                wn.col_a.resize(n);
                wn.col_b.resize(n);
                for (Eigen::Index r = 0; r < n; ++r) {
                    wn.col_a[r] = bicop_hfunc2(e.pc, cx[r], cy[r]);
                    wn.col_b[r] = bicop_hfunc1(e.pc, cx[r], cy[r]);
                }
                next_nodes.push_back(std::move(wn));
            }
            tree.push_back(std::move(e));
        }
        model.trees.push_back(std::move(tree));
        nodes = std::move(next_nodes);
    }

    build_cells(model);
    return model;
}

Mat sample_rvine(const RvineModel& m, int n, std::uint64_t seed) {
    const int d = m.d;
    Mat out(n, d);
#pragma omp parallel
    {
        RowWorkspace ws(m);
#pragma omp for schedule(static)
        for (int row = 0; row < n; ++row) {
            RngStream rs(substream(seed, RngPurpose::Scenario, static_cast<std::uint64_t>(row)));
            Vec w(d);
            for (int k = 0; k < d; ++k) w[k] = rs.uniform();

            ws.reset();
            ws.u[m.diag[d - 1]] = w[d - 1];
            for (int j = d - 2; j >= 0; --j) {
                double x = w[j];
                for (const auto& cell : m.cells[j]) {
                    const RvineEdge& e = m.trees[cell.tree][cell.index];
                    if (cell.diag_is_a) {
                        const double cond = ws.input(cell.tree, cell.index, false);
                        x = bicop_hinv2(e.pc, x, cond);
                    } else {
                        const double cond = ws.input(cell.tree, cell.index, true);
                        x = bicop_hinv1(e.pc, x, cond);
                    }
                }
                ws.u[m.diag[j]] = x;
            }
            for (int k = 0; k < d; ++k) out(row, k) = ws.u[k];
        }
    }
    return out;
}

Mat rvine_rosenblatt(const RvineModel& m, const Mat& u) {
    const int d = m.d;
    const Eigen::Index n = u.rows();
    if (u.cols() != d) throw std::invalid_argument("dimension mismatch");
    Mat out(n, d);
#pragma omp parallel
    {
        RowWorkspace ws(m);
#pragma omp for schedule(static)
        for (Eigen::Index row = 0; row < n; ++row) {
            ws.reset();
            for (int k = 0; k < d; ++k) ws.u[k] = u(row, k);

            out(row, d - 1) = ws.u[m.diag[d - 1]];
            for (int j = d - 2; j >= 0; --j) {
                double x = ws.u[m.diag[j]];
                // invert the sampling chain: tree 1 first
                for (auto it = m.cells[j].rbegin(); it != m.cells[j].rend(); ++it) {
                    const RvineEdge& e = m.trees[it->tree][it->index];
                    if (it->diag_is_a) {
                        const double cond = ws.input(it->tree, it->index, false);
                        x = bicop_hfunc2(e.pc, x, cond);
                    } else {
                        const double cond = ws.input(it->tree, it->index, true);
                        x = bicop_hfunc1(e.pc, cond, x);
                    }
                }
                out(row, j) = x;
            }
        }
    }
    return out;
}

bool rvine_structure_valid(const RvineModel& m) {
    const int d = m.d;
    if (static_cast<int>(m.trees.size()) != d - 1) return false;
    for (int k = 0; k < d - 1; ++k) {
        if (static_cast<int>(m.trees[k].size()) != d - 1 - k) return false;
        for (const auto& e : m.trees[k]) {
            if (static_cast<int>(e.cond.size()) != k) return false;
            if (e.var_a == e.var_b) return false;
            if (k > 0) {
                const auto& ca = m.trees[k - 1][e.child_a];
                const auto& cb = m.trees[k - 1][e.child_b];
                // proximity: children share a node of tree k-1
                const bool share =
                    k == 1 ? (ca.var_a == cb.var_a || ca.var_a == cb.var_b ||
                              ca.var_b == cb.var_a || ca.var_b == cb.var_b)
                           : (ca.child_a == cb.child_a || ca.child_a == cb.child_b ||
                              ca.child_b == cb.child_a || ca.child_b == cb.child_b);
                if (!share) return false;
                // conditioned pair is the symmetric difference of the child constraints
                const auto sym = sorted_union(sorted_diff(ca.constraint, cb.constraint),
                                              sorted_diff(cb.constraint, ca.constraint));
                if (sym != sorted_union({std::min(e.var_a, e.var_b)},
                                        {std::max(e.var_a, e.var_b)}))
                    return false;
            }
        }
    }
    return true;
}

nlohmann::json rvine_to_json(const RvineModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : m.trees) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : tree) {
            edges.push_back(nlohmann::json{{"a", e.var_a},
                                           {"b", e.var_b},
                                           {"cond", e.cond},
                                           {"child_a", e.child_a},
                                           {"child_b", e.child_b},
                                           {"child_a_is_a", e.child_a_is_a},
                                           {"child_b_is_a", e.child_b_is_a},
                                           {"tau", e.tau},
                                           {"pc", bicop_to_json(e.pc)}});
        }
        trees.push_back(edges);
    }
    return nlohmann::json{{"d", m.d}, {"trees", trees}};
}

RvineModel rvine_from_json(const nlohmann::json& j) {
    RvineModel m;
    m.d = j.at("d");
    for (const auto& tree : j.at("trees")) {
        std::vector<RvineEdge> edges;
        for (const auto& je : tree) {
            RvineEdge e;
            e.var_a = je.at("a");
            e.var_b = je.at("b");
            e.cond = je.at("cond").get<std::vector<int>>();
            e.child_a = je.at("child_a");
            e.child_b = je.at("child_b");
            e.child_a_is_a = je.at("child_a_is_a");
            e.child_b_is_a = je.at("child_b_is_a");
            e.tau = je.at("tau");
            e.pc = bicop_from_json(je.at("pc"));
            e.constraint = sorted_union(sorted_union({e.var_a}, {e.var_b}), e.cond);
            edges.push_back(std::move(e));
        }
        m.trees.push_back(std::move(edges));
    }
    build_cells(m);
    return m;
}

}  // namespace genport
