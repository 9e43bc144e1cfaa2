#include "bessval/lp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bessval {

namespace {

constexpr double kPrimalTol = 1e-10;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorEvery = 100;
constexpr int kStallBeforeBland = 200;

}  // namespace

int LinearProgram::add_col(double cost, double lo, double hi) {
    objective.push_back(cost);
    col_lo.push_back(lo);
    col_hi.push_back(hi);
    return cols() - 1;
}

int LinearProgram::add_row(std::vector<std::pair<int, double>> coeffs, double lo, double hi) {
    rows.push_back(std::move(coeffs));
    row_lo.push_back(lo);
    row_hi.push_back(hi);
    return num_rows() - 1;
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
    double v = 0.0;
    for (int j = 0; j < cols(); ++j) v += objective[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < objective.size(); ++j) {
        worst = std::max({worst, col_lo[j] - x[j], x[j] - col_hi[j]});
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double a = 0.0;
        for (const auto& [j, v] : rows[i]) a += v * x[static_cast<std::size_t>(j)];
        worst = std::max({worst, row_lo[i] - a, a - row_hi[i]});
    }
    return worst;
}

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Cutoff: return "cutoff";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

DualSimplex::DualSimplex(const LinearProgram& lp) : n_(lp.cols()), m_(lp.num_rows()) {
    const auto total = static_cast<std::size_t>(n_ + m_);
    w_ = Eigen::MatrixXd::Zero(m_, n_ + m_);
    for (int i = 0; i < m_; ++i) {
        for (const auto& [j, v] : lp.rows[static_cast<std::size_t>(i)]) {
            if (j < 0 || j >= n_) throw std::invalid_argument("LP row references unknown column");
            w_(i, j) += v;
        }
        w_(i, n_ + i) = -1.0;
    }
    cost_.assign(total, 0.0);
    lo_.assign(total, 0.0);
    hi_.assign(total, 0.0);
    for (int j = 0; j < n_; ++j) {
        const auto k = static_cast<std::size_t>(j);
        cost_[k] = -lp.objective[k];
        lo_[k] = lp.col_lo[k];
        hi_[k] = lp.col_hi[k];
    }
    for (int i = 0; i < m_; ++i) {
        const auto k = static_cast<std::size_t>(n_ + i);
        lo_[k] = lp.row_lo[static_cast<std::size_t>(i)];
        hi_[k] = lp.row_hi[static_cast<std::size_t>(i)];
    }
    d_.assign(total, 0.0);
    x_.assign(total, 0.0);
    reset_basis();
}

void DualSimplex::reset_basis() {
    const auto total = static_cast<std::size_t>(n_ + m_);
    head_.resize(static_cast<std::size_t>(m_));
    state_.assign(total, 'L');
    for (int i = 0; i < m_; ++i) {
        head_[static_cast<std::size_t>(i)] = n_ + i;
        state_[static_cast<std::size_t>(n_ + i)] = 'B';
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) {
        state_[j] = cost_[j] < 0.0 ? 'U' : 'L';
    }
    refactor();
    for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) place_nonbasic(j);
    recompute_primal();
}

void DualSimplex::place_nonbasic(std::size_t j) {
    const bool has_lo = std::isfinite(lo_[j]);
    const bool has_hi = std::isfinite(hi_[j]);
    if (d_[j] > kDualTol) {
        state_[j] = has_lo ? 'L' : (has_hi ? 'U' : 'F');
    } else if (d_[j] < -kDualTol) {
        state_[j] = has_hi ? 'U' : (has_lo ? 'L' : 'F');
    } else if (state_[j] == 'U' && has_hi) {
        state_[j] = 'U';
    } else {
        state_[j] = has_lo ? 'L' : (has_hi ? 'U' : 'F');
    }
}

double DualSimplex::nonbasic_value(std::size_t j) const {
    switch (state_[j]) {
        case 'L': return lo_[j];
        case 'U': return hi_[j];
        default: return 0.0;
    }
}

void DualSimplex::set_col_bounds(int col, double lo, double hi) {
    const auto j = static_cast<std::size_t>(col);
    lo_[j] = lo;
    hi_[j] = hi;
    if (state_[j] != 'B') {
        if (state_[j] == 'L' && !std::isfinite(lo)) place_nonbasic(j);
        if (state_[j] == 'U' && !std::isfinite(hi)) place_nonbasic(j);
        const double v = nonbasic_value(j);
        const double delta = v - x_[j];
        if (delta != 0.0) {
            for (int i = 0; i < m_; ++i) {
                x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= tab_(i, col) * delta;
            }
            x_[j] = v;
        }
    }
}

void DualSimplex::refactor() {
    Eigen::MatrixXd b(m_, m_);
    for (int i = 0; i < m_; ++i) b.col(i) = w_.col(head_[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    if (m_ > 0 && !(lu.rcond() > 1e-13)) {
        throw std::runtime_error("LP basis became singular");
    }
    tab_ = lu.solve(w_);
    for (int i = 0; i < m_; ++i) {
        tab_.col(head_[static_cast<std::size_t>(i)]).setZero();
        tab_(i, head_[static_cast<std::size_t>(i)]) = 1.0;
    }
    Eigen::RowVectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
    const Eigen::RowVectorXd y = cb * tab_;
    for (std::size_t k = 0; k < d_.size(); ++k) {
        d_[k] = state_[k] == 'B' ? 0.0 : cost_[k] - y(static_cast<Eigen::Index>(k));
    }
    since_refactor_ = 0;
}

void DualSimplex::recompute_primal() {
    for (std::size_t j = 0; j < x_.size(); ++j) {
        if (state_[j] != 'B') x_[j] = nonbasic_value(j);
    }
    for (int i = 0; i < m_; ++i) {
        double v = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            if (state_[j] != 'B' && x_[j] != 0.0) v -= tab_(i, static_cast<Eigen::Index>(j)) * x_[j];
        }
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = v;
    }
}

LpBasis DualSimplex::basis() const { return {head_, state_}; }

void DualSimplex::load_basis(const LpBasis& basis) {
    head_ = basis.head;
    state_ = basis.state;
    try {
        refactor();
    } catch (const std::runtime_error&) {
        reset_basis();
        return;
    }
    for (std::size_t j = 0; j < state_.size(); ++j) {
        if (state_[j] == 'L' && !std::isfinite(lo_[j])) place_nonbasic(j);
        if (state_[j] == 'U' && !std::isfinite(hi_[j])) place_nonbasic(j);
    }
    recompute_primal();
}

int DualSimplex::choose_leaving(bool bland) const {
    int best = -1;
    double worst = kPrimalTol;
    int best_var = 0;
    for (int i = 0; i < m_; ++i) {
        const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
        const double viol = std::max(lo_[k] - x_[k], x_[k] - hi_[k]);
        if (viol <= kPrimalTol) continue;
        if (bland) {
            if (best < 0 || static_cast<int>(k) < best_var) {
                best = i;
                best_var = static_cast<int>(k);
            }
        } else if (viol > worst) {
            worst = viol;
            best = i;
        }
    }
    return best;
}

int DualSimplex::choose_entering(int row, bool bland) const {
    const auto leave = static_cast<std::size_t>(head_[static_cast<std::size_t>(row)]);
    const double s = x_[leave] < lo_[leave] ? 1.0 : -1.0;
    auto eligible = [&](std::size_t j, double a) {
        if (state_[j] == 'B' || std::abs(a) <= kPivotTol) return false;
        if (lo_[j] == hi_[j]) return false;
        switch (state_[j]) {
            case 'L': return s * a < 0.0;
            case 'U': return s * a > 0.0;
            default: return true;
        }
    };
    // Harris ratio test: bound the step with relaxed reduced costs, then take
    // the largest pivot among candidates inside that bound.
    double theta_max = kInf;
    for (std::size_t j = 0; j < x_.size(); ++j) {
        const double a = tab_(row, static_cast<Eigen::Index>(j));
        if (!eligible(j, a)) continue;
        const double bound = (std::abs(d_[j]) + (bland ? 0.0 : kDualTol)) / std::abs(a);
        theta_max = std::min(theta_max, bound);
    }
    if (!std::isfinite(theta_max)) return -1;
    int best = -1;
    double best_pivot = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
        const double a = tab_(row, static_cast<Eigen::Index>(j));
        if (!eligible(j, a)) continue;
        const double ratio = std::abs(d_[j]) / std::abs(a);
        if (bland) {
            if (ratio <= theta_max + 1e-12) return static_cast<int>(j);
            continue;
        }
        if (ratio <= theta_max && std::abs(a) > best_pivot) {
            best_pivot = std::abs(a);
            best = static_cast<int>(j);
        }
    }
    return best;
}

void DualSimplex::pivot(int row, int col, double target) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto c = static_cast<Eigen::Index>(col);
    const auto leave = static_cast<std::size_t>(head_[static_cast<std::size_t>(row)]);
    const auto enter = static_cast<std::size_t>(col);
    const double alpha = tab_(r, c);

    // Move the entering variable so the leaving one lands on its bound.
    const double delta = -(target - x_[leave]) / alpha;
    for (int i = 0; i < m_; ++i) {
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= tab_(i, c) * delta;
    }
    x_[enter] += delta;
    x_[leave] = target;

    const Eigen::RowVectorXd prow = tab_.row(r) / alpha;
    Eigen::VectorXd pcol = tab_.col(c);
    pcol(r) = 0.0;
    tab_.noalias() -= pcol * prow;
    tab_.row(r) = prow;

    const double dj = d_[enter];
    for (std::size_t k = 0; k < d_.size(); ++k) d_[k] -= dj * prow(static_cast<Eigen::Index>(k));
    d_[enter] = 0.0;

    state_[leave] = target == lo_[leave] ? 'L' : 'U';
    state_[enter] = 'B';
    head_[static_cast<std::size_t>(row)] = col;
    ++since_refactor_;
}

LpStatus DualSimplex::solve(double cutoff) {
    for (std::size_t j = 0; j < lo_.size(); ++j) {
        if (lo_[j] > hi_[j]) return LpStatus::Infeasible;
    }
    // Restore dual feasibility of boxed nonbasic variables by bound flips.
    bool flipped = false;
    for (std::size_t j = 0; j < state_.size(); ++j) {
        if (state_[j] == 'B') continue;
        const bool wrong = (state_[j] == 'L' && d_[j] < -kDualTol) ||
                           (state_[j] == 'U' && d_[j] > kDualTol) ||
                           (state_[j] == 'F' && std::abs(d_[j]) > kDualTol);
        if (!wrong) continue;
        const char before = state_[j];
        place_nonbasic(j);
        if (state_[j] == before || (state_[j] == 'F' && std::abs(d_[j]) > 1e-7)) {
            throw std::runtime_error("LP column " + std::to_string(j) +
                                     " needs a finite bound for the dual simplex start");
        }
        flipped = true;
    }
    if (flipped) recompute_primal();

    const long limit = 50L * (n_ + m_) + 1000;
    long stall = 0;
    double last_obj = objective();
    for (long it = 0; it < limit; ++it) {
        if (since_refactor_ >= kRefactorEvery) {
            refactor();
            recompute_primal();
        }
        const double obj = objective();
        if (obj <= cutoff) return LpStatus::Cutoff;
        if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
            stall = 0;
            last_obj = obj;
        } else {
            ++stall;
        }
        const bool bland = stall > kStallBeforeBland;
        const int row = choose_leaving(bland);
        if (row < 0) {
            if (since_refactor_ > 0) {
                refactor();
                recompute_primal();
                if (choose_leaving(false) >= 0) continue;
            }
            return LpStatus::Optimal;
        }
        const int col = choose_entering(row, bland);
        if (col < 0) return LpStatus::Infeasible;
        const auto leave = static_cast<std::size_t>(head_[static_cast<std::size_t>(row)]);
        const double target = x_[leave] < lo_[leave] ? lo_[leave] : hi_[leave];
        pivot(row, col, target);
        ++iterations_;
    }
    return LpStatus::IterationLimit;
}

double DualSimplex::objective() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v -= cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    return v;
}

std::vector<double> DualSimplex::primal() const {
    return std::vector<double>(x_.begin(), x_.begin() + n_);
}

}  // namespace bessval
