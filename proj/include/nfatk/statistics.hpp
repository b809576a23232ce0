#ifndef NFATK_STATISTICS_HPP
#define NFATK_STATISTICS_HPP

#include <cstddef>
#include <vector>

namespace nfatk {

/// Pearson chi-square statistic against a uniform expectation.
double chi_square_statistic(const std::vector<std::size_t>& observed, double expected_each);

/// Upper-tail probability P(X >= x) for a chi-square distribution with df
/// degrees of freedom (regularized incomplete gamma Q(df/2, x/2)).
double chi_square_survival(double x, std::size_t df);

struct UniformityTest {
    double statistic;
    double p_value;
    bool rejected;  // p_value < significance
};

/// Chi-square goodness-of-fit of `observed` draws against the uniform
/// distribution over observed.size() cells.
UniformityTest test_uniformity(const std::vector<std::size_t>& observed, std::size_t total_draws,
                               double significance);

} // namespace nfatk

#endif
