#pragma once

// Best-first branch-and-bound over a DualSimplex relaxation.

#include "bessval/lp.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace bessval {

struct MilpOptions {
    double mip_gap = 1e-6;      // relative optimality gap
    long max_nodes = 200000;    // node budget; exceeding it ends with GapTerminated
};

enum class MilpStatus { Optimal, Infeasible, GapTerminated };

const char* to_string(MilpStatus status);

struct MilpProblem {
    LinearProgram lp;
    std::vector<int> integer_cols;
    /// Optional heuristic: given a relaxation solution, return an integer
    /// feasible point with the same objective, or nothing.
    std::function<std::optional<std::vector<double>>(const std::vector<double>&)> repair;
    /// Optional known feasible starting point.
    std::optional<std::vector<double>> incumbent;
};

struct MilpResult {
    MilpStatus status = MilpStatus::Infeasible;
    std::vector<double> x;
    double objective = -kInf;
    double bound = kInf;
    double gap = 0.0;
    long nodes = 0;
};

MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

}  // namespace bessval
