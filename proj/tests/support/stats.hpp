#pragma once

#include <cstddef>
#include <vector>

namespace hybridsim::testing {

struct MeanSe {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
};

[[nodiscard]] MeanSe mean_se(const std::vector<double>& xs);

/// |m_a - m_b| / sqrt(se_a^2 + se_b^2); 0 when both errors vanish and the
/// means agree.
[[nodiscard]] double combined_z(const MeanSe& a, const MeanSe& b);

/// Kolmogorov-Smirnov statistic of the sample against Exponential(rate).
[[nodiscard]] double ks_exponential(std::vector<double> xs, double rate);

/// Asymptotic two-sided KS critical value sqrt(-log(alpha / 2) / 2) / sqrt(n).
[[nodiscard]] double ks_critical(std::size_t n, double alpha);

}  // namespace hybridsim::testing
