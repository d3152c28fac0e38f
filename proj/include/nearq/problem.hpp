#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nearq {

/// Sum of n local quadratics f_i(x) = 1/2 x^T A_i x + b_i^T x over x in R^p.
///
/// All derived constants are computed once at construction and the object is
/// immutable afterwards, so it may be shared freely between concurrent runs.
class QuadraticProblem {
public:
    QuadraticProblem(std::vector<Eigen::MatrixXd> a, std::vector<Eigen::VectorXd> b, std::uint64_t seed = 0,
                     double kappa = 1.0);

    std::size_t nodes() const noexcept { return a_.size(); }
    std::size_t dim() const noexcept { return p_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double kappa() const noexcept { return kappa_; }

    const Eigen::MatrixXd &a(std::size_t i) const { return a_.at(i); }
    const Eigen::VectorXd &b(std::size_t i) const { return b_.at(i); }

    double lipschitz(std::size_t i) const { return lipschitz_.at(i); }         // L_i = lambda_max(A_i)
    double strong_convexity(std::size_t i) const { return strong_.at(i); }     // mu_i = lambda_min(A_i)
    double max_lipschitz() const noexcept { return max_lipschitz_; }           // L
    double mu_fbar() const noexcept { return mu_fbar_; }                       // mean of mu_i
    double l_fbar() const noexcept { return l_fbar_; }                         // mean of L_i

    const Eigen::VectorXd &local_minimizer(std::size_t i) const { return u_star_.at(i); }
    /// Stacked local minimizers u* in R^{np}.
    std::vector<double> stacked_local_minimizers() const;
    const Eigen::VectorXd &x_star() const noexcept { return x_star_; }

    /// lambda_max(sum A_i) / lambda_min(sum A_i).
    double global_condition() const noexcept { return global_condition_; }

    /// Self-describing text serialization (header n, p, seed, kappa; row-major CSV blocks).
    std::string serialize() const;
    static QuadraticProblem deserialize(const std::string &text);

private:
    std::size_t p_ = 0;
    std::uint64_t seed_ = 0;
    double kappa_ = 1.0;
    std::vector<Eigen::MatrixXd> a_;
    std::vector<Eigen::VectorXd> b_;
    std::vector<double> lipschitz_, strong_;
    double max_lipschitz_ = 0.0, mu_fbar_ = 0.0, l_fbar_ = 0.0;
    std::vector<Eigen::VectorXd> u_star_;
    Eigen::VectorXd x_star_;
    double global_condition_ = 1.0;
};

/// Random instance: A_i = R_i D_i R_i^T with R_i Haar-orthogonal (sign-fixed QR of a
/// Gaussian matrix) and D_i log-uniform in [1, kappa]; node 0 has its extreme
/// eigenvalues pinned to exactly 1 and kappa. b_i ~ N(0, I).
///
/// Randomness: std::mt19937_64 seeded with `seed`; per node the draws are, in order,
/// p*p normals (row-major Gaussian matrix), p uniforms (eigenvalues), p normals (b_i).
QuadraticProblem generate_quadratic(std::size_t n, std::size_t p, double kappa, std::uint64_t seed);

/// A_i x_i + b_i. Accumulation order is fixed (row-wise, ascending column, then + b).
void local_gradient_into(const QuadraticProblem &prob, std::size_t i, std::span<const double> x_i,
                         std::span<double> out);
std::vector<double> local_gradient(const QuadraticProblem &prob, std::size_t i, std::span<const double> x_i);

/// Solves (sum A_i) x = -sum b_i.
Eigen::VectorXd global_optimum(const QuadraticProblem &prob);

}    // namespace nearq
