#pragma once

// Synthetic data shared by the unit and acceptance tests.

#include "bessval/core.hpp"
#include "bessval/io.hpp"
#include "bessval/stats.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace bessval::testing {

/// AR(1)-style covariance sd^2 * phi^|i-j|.
inline Eigen::MatrixXd ar1_covariance(int hours, double sd, double phi) {
    Eigen::MatrixXd c(hours, hours);
    for (int i = 0; i < hours; ++i) {
        for (int j = 0; j < hours; ++j) c(i, j) = sd * sd * std::pow(phi, std::abs(i - j));
    }
    return c;
}

/// Daily price shape: morning trough, evening peak, random level and amplitude.
inline Eigen::VectorXd random_profile(Rng& rng, int hours, double level = 60.0, double amplitude = 25.0) {
    Eigen::VectorXd mu(hours);
    const double lvl = level + 10.0 * rng.normal();
    const double amp = amplitude * (0.6 + 0.8 * rng.uniform());
    const double phase = 0.5 * rng.normal();
    for (int h = 0; h < hours; ++h) {
        const double t = 2.0 * std::numbers::pi * (h + 0.5) / hours;
        mu(h) = lvl - amp * std::cos(t + phase) + 3.0 * rng.normal();
    }
    return mu;
}

inline GaussianPriceSpec random_day_spec(Rng& rng, int hours, double sd = 10.0, double phi = 0.7) {
    GaussianPriceSpec s;
    s.mu = random_profile(rng, hours);
    s.sigma = ar1_covariance(hours, sd, phi);
    return s;
}

/// Consecutive ISO dates starting at `first`.
inline std::vector<std::string> date_range(const std::string& first, int count) {
    std::vector<std::string> out;
    for (int i = 0; i < count; ++i) out.push_back(shift_date(first, i));
    return out;
}

/// Weekly-seasonal synthetic price history.
inline std::vector<PriceDay> synthetic_history(int days, std::uint64_t seed, int hours = kDefaultHours,
                                               const std::string& first = "2024-01-01") {
    Rng rng(seed);
    std::vector<PriceDay> out;
    for (const auto& d : date_range(first, days)) {
        const bool weekend = weekday_of(d) >= 5;
        std::vector<double> p(static_cast<std::size_t>(hours));
        double noise = 0.0;
        for (int h = 0; h < hours; ++h) {
            noise = 0.7 * noise + 6.0 * rng.normal();
            const double t = 2.0 * std::numbers::pi * (h + 0.5) / hours;
            p[static_cast<std::size_t>(h)] = (weekend ? 45.0 : 60.0) - 20.0 * std::cos(t) + noise;
        }
        out.emplace_back(d, std::move(p));
    }
    return out;
}

}  // namespace bessval::testing
