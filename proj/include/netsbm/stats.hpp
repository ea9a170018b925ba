#pragma once

#include <stdexcept>
#include <vector>

namespace netsbm {

class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FriedmanResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
};

/// Friedman rank test over blocked observations: rows are blocks (DMUs),
/// columns are treatments (model families). Ties take average ranks.
/// chi2 = 12/(n c (c+1)) * sum_f R_f^2 - 3 n (c+1), df = c-1, p from the
/// chi-square upper tail. Requires n >= 2 rows and c >= 2 columns.
FriedmanResult friedman_test(const std::vector<std::vector<double>>& values);

} // namespace netsbm
