#pragma once

// Dense bounded-variable dual simplex for small linear programs of the form
//
//   maximize c'x  subject to  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
//
// Sized for a few hundred rows and columns. Every column whose objective
// coefficient pushes it towards a bound must have that bound finite, so the
// all-logical starting basis is dual feasible.

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

namespace bessval {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
    std::vector<double> objective;
    std::vector<double> col_lo;
    std::vector<double> col_hi;
    std::vector<std::vector<std::pair<int, double>>> rows;  // sparse coefficients
    std::vector<double> row_lo;
    std::vector<double> row_hi;

    int add_col(double cost, double lo, double hi);
    int add_row(std::vector<std::pair<int, double>> coeffs, double lo, double hi);
    int cols() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
    double evaluate(const std::vector<double>& x) const;
    /// Largest bound or row violation of x.
    double max_violation(const std::vector<double>& x) const;
};

enum class LpStatus { Optimal, Infeasible, Cutoff, IterationLimit };

const char* to_string(LpStatus status);

struct LpBasis {
    std::vector<int> head;    // variable basic in each row
    std::vector<char> state;  // per variable: 'B' basic, 'L' at lower, 'U' at upper, 'F' free at zero
};

class DualSimplex {
public:
    explicit DualSimplex(const LinearProgram& lp);

    void set_col_bounds(int col, double lo, double hi);
    double col_lo(int col) const { return lo_[static_cast<std::size_t>(col)]; }
    double col_hi(int col) const { return hi_[static_cast<std::size_t>(col)]; }

    /// Runs dual simplex from the current basis. With a finite cutoff the
    /// solve stops early (status Cutoff) once the objective bound drops to
    /// or below it.
    LpStatus solve(double cutoff = -kInf);

    double objective() const;
    std::vector<double> primal() const;
    long iterations() const { return iterations_; }

    LpBasis basis() const;
    void load_basis(const LpBasis& basis);
    void reset_basis();

private:
    void refactor();
    void recompute_primal();
    void place_nonbasic(std::size_t j);
    double nonbasic_value(std::size_t j) const;
    int choose_leaving(bool bland) const;
    int choose_entering(int row, bool bland) const;
    void pivot(int row, int col, double target);

    int n_ = 0;  // structural columns
    int m_ = 0;  // rows (one logical variable each)
    Eigen::MatrixXd w_;     // [A | -I]
    std::vector<double> cost_;  // minimization costs over all variables
    std::vector<double> lo_, hi_;
    std::vector<int> head_;
    std::vector<char> state_;
    Eigen::MatrixXd tab_;   // B^{-1} W
    std::vector<double> d_; // reduced costs
    std::vector<double> x_; // values of all variables
    long iterations_ = 0;
    int since_refactor_ = 0;
};

}  // namespace bessval
