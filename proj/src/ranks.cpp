#include "bessval/ranks.hpp"

#include "bessval/stats.hpp"

#include <cmath>

namespace bessval {

RankEnsemble make_rank_ensemble(const ScenarioEnsemble& forecast, const PriceDay& day) {
    if (forecast.hours() != day.hours()) throw InputError("ensemble and price day differ in hours");
    RankEnsemble out;
    out.members.resize(forecast.members(), forecast.hours());
    std::vector<double> row(static_cast<std::size_t>(forecast.hours()));
    for (int m = 0; m < forecast.members(); ++m) {
        for (int h = 0; h < forecast.hours(); ++h) row[static_cast<std::size_t>(h)] = forecast.paths()(m, h);
        const auto r = ordinal_ranks(row);
        for (int h = 0; h < forecast.hours(); ++h) out.members(m, h) = r[static_cast<std::size_t>(h)];
    }
    out.observed = ordinal_ranks(day.prices());
    return out;
}

RankEnsemble make_rank_ensemble(const Eigen::MatrixXi& member_ranks, std::vector<int> observed) {
    const auto k = static_cast<int>(observed.size());
    if (member_ranks.cols() != k || member_ranks.rows() < 1) throw InputError("rank ensemble shape mismatch");
    auto check = [k](auto get) {
        std::vector<char> seen(static_cast<std::size_t>(k), 0);
        for (int h = 0; h < k; ++h) {
            const int r = get(h);
            if (r < 1 || r > k || seen[static_cast<std::size_t>(r - 1)]) {
                throw InputError("rank vectors must be permutations of 1..K");
            }
            seen[static_cast<std::size_t>(r - 1)] = 1;
        }
    };
    for (Eigen::Index m = 0; m < member_ranks.rows(); ++m) check([&](int h) { return member_ranks(m, h); });
    check([&](int h) { return observed[static_cast<std::size_t>(h)]; });
    return {member_ranks, std::move(observed)};
}

TauSigns tau_signs(std::span<const double> x) {
    TauSigns out;
    const std::size_t n = x.size();
    out.sign.reserve(n * (n - 1) / 2);
    long untied = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::int8_t s = x[j] > x[i] ? 1 : (x[j] < x[i] ? -1 : 0);
            out.sign.push_back(s);
            untied += s != 0;
        }
    }
    out.norm = std::sqrt(static_cast<double>(untied));
    return out;
}

double kendall_tau(const TauSigns& a, const TauSigns& b) {
    if (a.sign.size() != b.sign.size()) throw InputError("Kendall's tau of vectors with different lengths");
    if (a.norm == 0.0 || b.norm == 0.0) throw InputError("Kendall's tau is undefined for a constant vector");
    long dot = 0;
    for (std::size_t p = 0; p < a.sign.size(); ++p) dot += a.sign[p] * b.sign[p];
    return static_cast<double>(dot) / (a.norm * b.norm);
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw InputError("Kendall's tau needs two vectors of equal length >= 2");
    return kendall_tau(tau_signs(a), tau_signs(b));
}

const char* to_string(KendallMode mode) { return mode == KendallMode::AsWritten ? "as-written" : "kernel"; }

double kendall_score(const ScenarioEnsemble& forecast, const PriceDay& day, KendallMode mode) {
    const int m = forecast.members();
    if (m < 1) throw InputError("Kendall score needs at least 1 member");
    if (forecast.hours() != day.hours() || day.hours() < 2) throw InputError("Kendall score needs matching days of >= 2 hours");
    const TauSigns y = tau_signs(day.prices());
    if (y.norm == 0.0) throw InputError("Kendall score: observed prices of " + day.date() + " are constant");
    std::vector<TauSigns> f;
    f.reserve(static_cast<std::size_t>(m));
    std::vector<double> row(static_cast<std::size_t>(forecast.hours()));
    for (int i = 0; i < m; ++i) {
        for (int h = 0; h < forecast.hours(); ++h) row[static_cast<std::size_t>(h)] = forecast.paths()(i, h);
        f.push_back(tau_signs(row));
        if (f.back().norm == 0.0) {
            throw InputError("Kendall score: member " + std::to_string(i) + " of " + day.date() + " is constant");
        }
    }
    double with_obs = 0.0;
    for (const auto& s : f) with_obs += kendall_tau(s, y);
    with_obs /= m;
    double between = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) between += kendall_tau(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(j)]);
    }
    // Distinct member pairs; a single member is concordant with itself.
    between = m > 1 ? 2.0 * between / (static_cast<double>(m) * (m - 1)) : 1.0;
    const double self = 1.0;  // tau(y, y) for a non-constant y
    if (mode == KendallMode::AsWritten) return 0.5 * with_obs - between - self;
    return 0.5 * between - with_obs + 0.5 * self;
}

RankScores rank_scores(const RankEnsemble& ranks, const std::vector<int>& top_k) {
    const int big_k = ranks.hours();
    const int m = ranks.size();
    const auto kk = static_cast<std::size_t>(big_k);
    // prob(h, r): share of members giving hour h rank r + 1.
    Eigen::MatrixXd prob = Eigen::MatrixXd::Zero(big_k, big_k);
    for (int i = 0; i < m; ++i) {
        for (int h = 0; h < big_k; ++h) prob(h, ranks.members(i, h) - 1) += 1.0 / m;
    }
    Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(big_k, big_k);
    for (int h = 0; h < big_k; ++h) obs(h, ranks.observed[static_cast<std::size_t>(h)] - 1) = 1.0;
    const Eigen::MatrixXd diff2 = (prob - obs).array().square().matrix();

    RankScores out;
    out.brier_rank.resize(kk);
    out.brier_item.resize(kk);
    for (int k = 0; k < big_k; ++k) out.brier_rank[static_cast<std::size_t>(k)] = diff2.col(k).sum() / big_k;
    for (int h = 0; h < big_k; ++h) out.brier_item[static_cast<std::size_t>(h)] = diff2.row(h).sum() / big_k;
    out.brier = diff2.sum() / big_k;

    double rps = 0.0;
    for (int h = 0; h < big_k; ++h) {
        double cp = 0.0;
        double co = 0.0;
        for (int k = 0; k < big_k; ++k) {
            cp += prob(h, k);
            co += obs(h, k);
            rps += (cp - co) * (cp - co);
        }
    }
    out.rps = rps / (static_cast<double>(big_k) * big_k);

    for (int k : top_k) {
        if (k < 1 || 2 * k > big_k) continue;
        std::vector<double> p_low(kk, 0.0), p_high(kk, 0.0), p_bess(kk, 0.0);
        auto accumulate = [&](auto rank_of, std::vector<double>& low, std::vector<double>& high,
                              std::vector<double>& bess, double w) {
            int lows_before = 0;
            for (int h = 0; h < big_k; ++h) {
                const int r = rank_of(h);
                const bool is_low = r <= k;
                const bool is_high = r > big_k - k;
                if (is_low) low[static_cast<std::size_t>(h)] += w;
                if (is_high) high[static_cast<std::size_t>(h)] += w;
                if (is_high && lows_before >= k) bess[static_cast<std::size_t>(h)] += w;
                lows_before += is_low;
            }
        };
        for (int i = 0; i < m; ++i) {
            accumulate([&](int h) { return ranks.members(i, h); }, p_low, p_high, p_bess, 1.0 / m);
        }
        std::vector<double> o_low(kk, 0.0), o_high(kk, 0.0), o_bess(kk, 0.0);
        accumulate([&](int h) { return ranks.observed[static_cast<std::size_t>(h)]; }, o_low, o_high, o_bess, 1.0);
        TopKScores t;
        t.k = k;
        double sl = 0.0, sh = 0.0, sb = 0.0;
        for (std::size_t h = 0; h < kk; ++h) {
            sl += (p_low[h] - o_low[h]) * (p_low[h] - o_low[h]);
            sh += (p_high[h] - o_high[h]) * (p_high[h] - o_high[h]);
            sb += (p_bess[h] - o_bess[h]) * (p_bess[h] - o_bess[h]);
        }
        t.low = sl / k;
        t.high = sh / k;
        t.low_high = (sl + sh) / (2.0 * k);
        t.bess = (sl + sb) / (2.0 * k);
        out.top_k.push_back(t);
    }
    return out;
}

}  // namespace bessval
