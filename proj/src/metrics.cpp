#include "nearq/metrics.hpp"

#include "nearq/error.hpp"

#include <algorithm>
#include <cmath>

namespace nearq {

double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

RelativeError relative_error(std::span<const double> xbar, std::span<const double> x_star) {
    const double d = distance(xbar, x_star);
    const double ref = euclidean_norm(x_star);
    if (ref == 0.0) return {d * d, true};
    return {(d * d) / (ref * ref), false};
}

std::vector<double> block_mean(std::span<const double> x, std::size_t p) {
    if (p == 0 || x.size() % p != 0) throw DimensionError("block_mean: size is not a multiple of p");
    const auto n = x.size() / p;
    std::vector<double> mean(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < p; ++c) mean[c] += x[i * p + c];
    for (auto &m : mean) m /= static_cast<double>(n);
    return mean;
}

ConsensusDeviation consensus_deviation(std::span<const double> x, std::size_t p) {
    const auto mean = block_mean(x, p);
    const auto n = x.size() / p;
    ConsensusDeviation dev;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = distance(x.subspan(i * p, p), mean);
        dev.max = std::max(dev.max, d);
        sum_sq += d * d;
    }
    dev.rms = n ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0;
    return dev;
}

void CostModel::validate() const {
    if (!(c_c >= 0.0) || !(c_g >= 0.0)) throw ConfigError("cost parameters must be nonnegative");
}

double cost(std::uint64_t digits, std::uint64_t grad_evals, const CostModel &model) {
    return static_cast<double>(digits) * model.c_c + static_cast<double>(grad_evals) * model.c_g;
}

}    // namespace nearq
