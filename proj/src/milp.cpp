#include "bessval/milp.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace bessval {

namespace {

struct Fix {
    int col;
    double lo;
    double hi;
};

struct Node {
    std::vector<Fix> fixes;
    double bound;
    LpBasis basis;
    long id;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id > b.id;
    }
};

constexpr double kIntegralityTol = 1e-9;

}  // namespace

const char* to_string(MilpStatus status) {
    switch (status) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::GapTerminated: return "gap-terminated";
    }
    return "unknown";
}

MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& options) {
    const LinearProgram& lp = problem.lp;
    DualSimplex solver(lp);
    MilpResult result;

    double incumbent = -kInf;
    std::vector<double> best;
    if (problem.incumbent) {
        best = *problem.incumbent;
        incumbent = lp.evaluate(best);
    }
    auto prune_tol = [&]() {
        return std::max(1e-9 * (1.0 + std::abs(incumbent)), options.mip_gap * std::abs(incumbent));
    };
    auto offer = [&](const std::vector<double>& x, double value) {
        if (!std::isfinite(incumbent) || value > incumbent + 1e-9 * (1.0 + std::abs(incumbent))) {
            incumbent = value;
            best = x;
        }
    };
    auto apply = [&](const std::vector<Fix>& fixes) {
        for (int j : problem.integer_cols) {
            const auto k = static_cast<std::size_t>(j);
            solver.set_col_bounds(j, lp.col_lo[k], lp.col_hi[k]);
        }
        for (const Fix& f : fixes) solver.set_col_bounds(f.col, f.lo, f.hi);
    };

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push(Node{{}, kInf, solver.basis(), next_id++});
    bool exhausted = false;
    double unexplored_bound = -kInf;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (std::isfinite(incumbent) && node.bound <= incumbent + prune_tol()) continue;
        apply(node.fixes);
        if (node.id != 0) solver.load_basis(node.basis);

        std::vector<Fix> fixes = std::move(node.fixes);
        double parent_bound = node.bound;
        while (true) {
            if (result.nodes >= options.max_nodes) {
                exhausted = true;
                unexplored_bound = std::max(unexplored_bound, parent_bound);
                break;
            }
            ++result.nodes;
            const double cutoff = std::isfinite(incumbent) ? incumbent + prune_tol() : -kInf;
            const LpStatus status = solver.solve(cutoff);
            if (status == LpStatus::IterationLimit) {
                throw std::runtime_error("LP relaxation hit its iteration limit");
            }
            if (status != LpStatus::Optimal) break;
            const double obj = solver.objective();
            std::vector<double> x = solver.primal();

            int branch_col = -1;
            double branch_frac = kIntegralityTol;
            for (int j : problem.integer_cols) {
                const double v = x[static_cast<std::size_t>(j)];
                const double frac = std::abs(v - std::round(v));
                if (frac > branch_frac) {
                    branch_frac = frac;
                    branch_col = j;
                }
            }
            if (branch_col < 0) {
                for (int j : problem.integer_cols) {
                    auto& v = x[static_cast<std::size_t>(j)];
                    v = std::round(v);
                }
                offer(x, obj);
                break;
            }
            if (problem.repair) {
                if (auto fixed = problem.repair(x)) {
                    const double value = lp.evaluate(*fixed);
                    offer(*fixed, value);
                    if (value >= obj - 1e-9 * (1.0 + std::abs(obj))) break;
                }
            }
            if (std::isfinite(incumbent) && obj <= incumbent + prune_tol()) break;

            const double v = x[static_cast<std::size_t>(branch_col)];
            const Fix down{branch_col, solver.col_lo(branch_col), std::floor(v)};
            const Fix up{branch_col, std::ceil(v), solver.col_hi(branch_col)};
            const bool go_up = v - std::floor(v) >= 0.5;
            Node other{fixes, obj, solver.basis(), next_id++};
            other.fixes.push_back(go_up ? down : up);
            open.push(std::move(other));

            const Fix& first = go_up ? up : down;
            fixes.push_back(first);
            solver.set_col_bounds(first.col, first.lo, first.hi);
            parent_bound = obj;
        }
        if (exhausted) break;
    }

    result.x = best;
    result.objective = incumbent;
    if (exhausted) {
        while (!open.empty()) {
            unexplored_bound = std::max(unexplored_bound, open.top().bound);
            open.pop();
        }
        result.bound = std::max(incumbent, unexplored_bound);
        result.status = best.empty() ? MilpStatus::Infeasible : MilpStatus::GapTerminated;
    } else {
        result.bound = incumbent;
        result.status = best.empty() ? MilpStatus::Infeasible : MilpStatus::Optimal;
    }
    if (!best.empty()) {
        result.gap = (result.bound - incumbent) / std::max(1.0, std::abs(incumbent));
    }
    return result;
}

}  // namespace bessval
