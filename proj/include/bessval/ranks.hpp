#pragma once

// Rank-based evaluation: rank ensembles, Kendall's tau kernel score, and
// Brier/RPS/top-k scores over within-day price ranks.

#include "bessval/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace bessval {

/// Within-day ranks (1 = cheapest); equal prices are ranked by hour index.
struct RankEnsemble {
    Eigen::MatrixXi members;  // M x K
    std::vector<int> observed;

    int size() const { return static_cast<int>(members.rows()); }
    int hours() const { return static_cast<int>(members.cols()); }
};

RankEnsemble make_rank_ensemble(const ScenarioEnsemble& forecast, const PriceDay& day);
RankEnsemble make_rank_ensemble(const Eigen::MatrixXi& member_ranks, std::vector<int> observed);

/// Kendall's tau-b between two equally long vectors. Throws InputError when
/// either vector is constant.
double kendall_tau(std::span<const double> a, std::span<const double> b);

/// Precomputed pairwise order signs of a vector, for repeated tau evaluation.
struct TauSigns {
    std::vector<std::int8_t> sign;
    double norm = 0.0;  // sqrt of the number of untied pairs
};

TauSigns tau_signs(std::span<const double> x);
double kendall_tau(const TauSigns& a, const TauSigns& b);

enum class KendallMode {
    AsWritten,  // 1/2 E tau(F, y) - E tau(F, F') - tau(y, y)
    Kernel,     // 1/2 E tau(F, F') - E tau(F, y) + 1/2 tau(y, y)
};

const char* to_string(KendallMode mode);

/// Kendall score; E tau(F, F') averages ordered member pairs m != n.
double kendall_score(const ScenarioEnsemble& forecast, const PriceDay& day, KendallMode mode);

struct TopKScores {
    int k = 0;
    double low = 0.0;
    double high = 0.0;
    double low_high = 0.0;
    double bess = 0.0;
};

struct RankScores {
    std::vector<double> brier_rank;  // per rank k = 1..K
    std::vector<double> brier_item;  // per hour
    double brier = 0.0;              // sum of per-rank scores, in [0, 2]
    double rps = 0.0;
    std::vector<TopKScores> top_k;
};

RankScores rank_scores(const RankEnsemble& ranks, const std::vector<int>& top_k = {1, 2, 4, 8});

}  // namespace bessval
