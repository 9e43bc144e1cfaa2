#include "bessval/stats.hpp"

#include "bessval/core.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

namespace bessval {

namespace {

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

double normal_cdf(double x) {
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    return boost::math::cdf(kStdNormal, x);
}

double normal_pdf(double x) {
    if (!std::isfinite(x)) return 0.0;
    return boost::math::pdf(kStdNormal, x);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile level must lie in (0, 1)");
    return boost::math::quantile(kStdNormal, p);
}

double student_t_quantile(double dof, double p) {
    if (!(dof > 0.0)) throw InputError("Student-t degrees of freedom must be positive");
    if (!(p > 0.0 && p < 1.0)) throw InputError("Student-t quantile level must lie in (0, 1)");
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

double mean(std::span<const double> x) {
    if (x.empty()) throw InputError("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double midpoint_quantile(std::span<const double> sorted, double level) {
    const std::size_t n = sorted.size();
    if (n == 0) throw InputError("quantile of an empty sample");
    const double pos = level * static_cast<double>(n) - 0.5;  // 0-based fractional index
    if (pos <= 0.0) return sorted.front();
    if (pos >= static_cast<double>(n - 1)) return sorted.back();
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * sorted[i] + w * sorted[i + 1];
}

double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return midpoint_quantile(x, 0.5);
}

std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

std::vector<int> ordinal_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<int> ranks(n);
    for (std::size_t k = 0; k < n; ++k) ranks[order[k]] = static_cast<int>(k) + 1;
    return ranks;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(root, a), b);
}

double Rng::uniform() {
    // 53-bit mantissa, shifted by half a step so 0 and 1 are never returned.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw InputError("cannot draw an index from an empty range");
    // Rejection sampling keeps the draw unbiased and identical across platforms.
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % range);
}

}  // namespace bessval
