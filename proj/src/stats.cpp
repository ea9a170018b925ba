#include "netsbm/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netsbm {

FriedmanResult friedman_test(const std::vector<std::vector<double>>& values) {
    const size_t n = values.size();
    if (n < 2) throw StatsError("Friedman test needs at least 2 blocks (DMUs)");
    const size_t c = values.front().size();
    if (c < 2) throw StatsError("Friedman test needs at least 2 treatments (families)");
    for (const auto& row : values) {
        if (row.size() != c) throw StatsError("ragged efficiency matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw StatsError("missing cell in the compared block");
    }

    std::vector<double> rank_sum(c, 0.0);
    std::vector<size_t> order(c);
    for (const auto& row : values) {
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return row[a] < row[b]; });
        size_t i = 0;
        while (i < c) {
            size_t j = i;
            while (j + 1 < c && row[order[j + 1]] == row[order[i]]) ++j;
            double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (size_t t = i; t <= j; ++t) rank_sum[order[t]] += avg_rank;
            i = j + 1;
        }
    }

    const double dn = static_cast<double>(n);
    const double dc = static_cast<double>(c);
    double sum_sq = 0.0;
    for (double r : rank_sum) sum_sq += r * r;

    FriedmanResult out;
    out.statistic = 12.0 / (dn * dc * (dc + 1.0)) * sum_sq - 3.0 * dn * (dc + 1.0);
    if (out.statistic < 0.0 && out.statistic > -1e-9) out.statistic = 0.0; // fp dust on full ties
    out.df = static_cast<int>(c) - 1;
    boost::math::chi_squared dist(out.df);
    out.p_value = out.statistic <= 0.0
                      ? 1.0
                      : boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

} // namespace netsbm
