#include "nfatk/statistics.hpp"

#include <cmath>
#include <stdexcept>

namespace nfatk {

namespace {

// Regularized incomplete gamma functions, series + continued fraction
// (Numerical Recipes style). Good to ~1e-12 over the ranges used here.

double gamma_series_p(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_cf_q(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
    return gamma_cf_q(a, x);
}

} // namespace

double chi_square_statistic(const std::vector<std::size_t>& observed, double expected_each) {
    double stat = 0.0;
    for (std::size_t o : observed) {
        double diff = static_cast<double>(o) - expected_each;
        stat += diff * diff / expected_each;
    }
    return stat;
}

double chi_square_survival(double x, std::size_t df) {
    return gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
}

UniformityTest test_uniformity(const std::vector<std::size_t>& observed, std::size_t total_draws,
                               double significance) {
    double expected = static_cast<double>(total_draws) / static_cast<double>(observed.size());
    double stat = chi_square_statistic(observed, expected);
    double p = chi_square_survival(stat, observed.size() - 1);
    return {stat, p, p < significance};
}

} // namespace nfatk
