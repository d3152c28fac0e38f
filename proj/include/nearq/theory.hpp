#pragma once

#include "nearq/problem.hpp"
#include "nearq/quantization.hpp"
#include "nearq/topology.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace nearq {

/// Constants of the bounded-iterate, bounded-deviation, neighbourhood and
/// R-linear convergence results for a given (problem, W, alpha, y0, quantizer).
///
/// Naming: `gamma` is min_i gamma_i (iterate contraction), `gamma_env` is the
/// envelope constant with k * eta^k <= gamma_env^k used by the R-linear result.
struct TheoryConstants {
    std::size_t n = 0;
    std::size_t p = 0;
    double alpha = 0.0;
    double lipschitz = 0.0;    // L = max_i L_i
    double beta = 0.0;

    std::vector<double> gamma_i;    // 2 mu_i L_i / (mu_i + L_i)
    double gamma = 0.0;
    double nu = 0.0;    // 2 alpha gamma
    double D = 0.0;     // ||y0 - u*|| + (nu + 4)/nu ||u*||

    double c1 = 0.0;    // sqrt(1 - alpha c2)
    double c2 = 0.0;    // 2 mu_fbar L_fbar / (mu_fbar + L_fbar)
    double c3 = 0.0;    // alpha D L
    double c4 = 0.0;    // 2 alpha L / nu
    double c5 = 0.0;    // (alpha L (sqrt n + 1) + 1) / sqrt n
    double c6 = 0.0;    // 2 / (mu_fbar + L_fbar)

    /// sqrt(np) * base spacing; 0 for the identity quantizer.
    double delta_tilde = 0.0;
    /// False for the digit quantizer, whose relative error has no absolute bound.
    bool quantizer_covered = true;
    std::optional<double> eta;

    /// Set when an R-linear envelope exists (eta * 3^(1/3) < 1, or no quantization error).
    std::optional<double> gamma_env;
    std::optional<double> rho;
    /// Lower floor of C: 8 (c3 + c4 dt + c5 dt) / (alpha c2)^2.
    double envelope_floor = 0.0;

    /// alpha < 1/L and alpha <= c6.
    bool compliant = false;
    /// nu < 1, the domain in which sqrt(1 - nu) is a real contraction factor.
    bool nu_below_one = false;
};

/// min{1/L, c6} for the problem.
double step_limit(const QuadraticProblem &prob);

TheoryConstants compute_constants(const QuadraticProblem &prob, const MixingMatrix &w, double alpha,
                                  std::span<const double> y0, const Quantizer &quantizer);

/// Neighbourhood bound on ||xbar_k - x*|| for a fixed number t of consensus rounds.
/// Throws ConfigError when c1 >= 1.
double bound_mean_error(const TheoryConstants &tc, std::size_t k, std::size_t t, double initial_err);

enum class LocalIterate { x_agent, y_agent };

/// Per-agent bound on ||x_{i,k} - x*|| or ||y_{i,k} - x*||.
double bound_local_error(const TheoryConstants &tc, std::size_t k, std::size_t t, double initial_err,
                         LocalIterate which);

/// Bounded-iterate radii: ||y_k|| and ||x_k^t||.
double iterate_bound_y(const TheoryConstants &tc, double t_delta);
double iterate_bound_x(const TheoryConstants &tc, double t_delta);

/// Bounded deviation from the mean: ||x_{i,k} - xbar_k|| and ||y_{i,k} - ybar_k||.
/// `t_delta` is t * delta_tilde (or t(k) * delta_tilde_k).
double deviation_bound_x(const TheoryConstants &tc, std::size_t t, double t_delta);
double deviation_bound_y(const TheoryConstants &tc, std::size_t t, double t_delta);

/// max{initial_err, envelope_floor}.
double envelope_constant(const TheoryConstants &tc, double initial_err);

/// C rho^k for the t(k) = k, delta_tilde_k = eta^k delta_tilde scheme; nullopt when not applicable.
std::optional<double> r_linear_envelope(const TheoryConstants &tc, std::size_t k, double initial_err);

/// Smallest gamma of the form eta * c with k eta^k <= gamma^k for every integer k >= 1.
double envelope_gamma(double eta);

}    // namespace nearq
