#include "dp_oracle.hpp"

#include <algorithm>
#include <limits>

namespace testsupport {

std::vector<double> dp_min_sse(const std::vector<double>& scores, const std::vector<double>& weights)
{
    const std::size_t n = scores.size();
    // cost[i][j]: segment [i, j), summed directly.
    std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j) {
            double w = 0, ws = 0;
            for (std::size_t t = i; t < j; ++t) {
                w += weights[t];
                ws += weights[t] * scores[t];
            }
            const double mean = ws / w;
            double c = 0;
            for (std::size_t t = i; t < j; ++t)
                c += weights[t] * (scores[t] - mean) * (scores[t] - mean);
            cost[i][j] = c;
        }
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(n + 1, std::vector<double>(n + 1, inf));
    best[0][0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t j = k; j <= n; ++j)
            for (std::size_t i = k - 1; i < j; ++i)
                if (best[k - 1][i] < inf)
                    best[k][j] = std::min(best[k][j], best[k - 1][i] + cost[i][j]);
    std::vector<double> out(n + 1, inf);
    for (std::size_t k = 1; k <= n; ++k)
        out[k] = best[k][n];
    return out;
}

} // namespace testsupport
