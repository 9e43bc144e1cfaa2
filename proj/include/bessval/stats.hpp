#pragma once

// Small numeric helpers: distribution functions, sample moments, empirical
// quantiles, ranks and seeded random streams.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bessval {

double normal_cdf(double x);
double normal_pdf(double x);
/// Inverse standard normal CDF for p in (0, 1).
double normal_quantile(double p);
double student_t_quantile(double dof, double p);

double mean(std::span<const double> x);
/// Unbiased sample variance (divisor n - 1); 0 for n < 2.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);

/// Quantile of a sorted sample under the midpoint convention: the i-th order
/// statistic (1-based) sits at level (i - 0.5) / n, linear in between and
/// clamped to the extremes outside [0.5/n, 1 - 0.5/n].
double midpoint_quantile(std::span<const double> sorted, double level);
double median(std::vector<double> x);

/// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

/// Ranks 1..n with ties broken by index (first occurrence gets the lower rank).
std::vector<int> ordinal_ranks(std::span<const double> x);

/// Decorrelated child seed for cell `index` of a run seeded with `root`.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b);

/// Seeded random stream used by every sampler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    /// Uniform draw in the open interval (0, 1).
    double uniform();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bessval
