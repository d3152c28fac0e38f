#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nearq {

struct RelativeError {
    double value = 0.0;
    bool absolute = false;    // x* = 0: value is the absolute squared error
};

/// ||xbar - x*||^2 / ||x*||^2.
RelativeError relative_error(std::span<const double> xbar, std::span<const double> x_star);

/// Average of the n blocks of a stacked vector.
std::vector<double> block_mean(std::span<const double> x, std::size_t p);

struct ConsensusDeviation {
    double max = 0.0;    // max_i ||x_i - xbar||
    double rms = 0.0;    // sqrt(mean_i ||x_i - xbar||^2)
};

ConsensusDeviation consensus_deviation(std::span<const double> x, std::size_t p);

struct CostModel {
    double c_c = 0.0;    // per transmitted digit (or bit)
    double c_g = 1.0;    // per local gradient evaluation

    void validate() const;
};

/// digits * c_c + gradient evaluations * c_g.
double cost(std::uint64_t digits, std::uint64_t grad_evals, const CostModel &model);

double euclidean_norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);

}    // namespace nearq
