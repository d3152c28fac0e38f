#include "nearq/theory.hpp"

#include "nearq/error.hpp"

#include <algorithm>
#include <cmath>

namespace nearq {

double step_limit(const QuadraticProblem &prob) {
    const double c6 = 2.0 / (prob.mu_fbar() + prob.l_fbar());
    return std::min(1.0 / prob.max_lipschitz(), c6);
}

double envelope_gamma(double eta) {
    // max over integers k >= 1 of k^(1/k) is attained at k = 3.
    return eta * std::cbrt(3.0);
}

TheoryConstants compute_constants(const QuadraticProblem &prob, const MixingMatrix &w, double alpha,
                                  std::span<const double> y0, const Quantizer &quantizer) {
    const auto n = prob.nodes();
    const auto p = prob.dim();
    if (w.size() != n) throw DimensionError("mixing matrix and problem disagree on n");
    if (y0.size() != n * p) throw DimensionError("initial iterate must have n*p entries");
    if (!(alpha > 0.0)) throw ConfigError("steplength must be positive");

    TheoryConstants tc;
    tc.n = n;
    tc.p = p;
    tc.alpha = alpha;
    tc.lipschitz = prob.max_lipschitz();
    tc.beta = w.beta();

    tc.gamma = HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = prob.strong_convexity(i);
        const double l = prob.lipschitz(i);
        tc.gamma_i.push_back(2.0 * mu * l / (mu + l));
        tc.gamma = std::min(tc.gamma, tc.gamma_i.back());
    }
    tc.nu = 2.0 * alpha * tc.gamma;

    const auto u_star = prob.stacked_local_minimizers();
    double dist = 0.0, unorm = 0.0;
    for (std::size_t j = 0; j < u_star.size(); ++j) {
        dist += (y0[j] - u_star[j]) * (y0[j] - u_star[j]);
        unorm += u_star[j] * u_star[j];
    }
    tc.D = std::sqrt(dist) + (tc.nu + 4.0) / tc.nu * std::sqrt(unorm);

    const double mu_f = prob.mu_fbar();
    const double l_f = prob.l_fbar();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    tc.c2 = 2.0 * mu_f * l_f / (mu_f + l_f);
    tc.c1 = std::sqrt(std::max(0.0, 1.0 - alpha * tc.c2));
    tc.c3 = alpha * tc.D * tc.lipschitz;
    tc.c4 = 2.0 * alpha * tc.lipschitz / tc.nu;
    tc.c5 = (alpha * tc.lipschitz * (sqrt_n + 1.0) + 1.0) / sqrt_n;
    tc.c6 = 2.0 / (mu_f + l_f);

    const double sqrt_np = std::sqrt(static_cast<double>(n * p));
    if (const auto *u = std::get_if<UniformQuantizerSpec>(&quantizer)) {
        tc.delta_tilde = sqrt_np * u->base_spacing();
        tc.eta = u->eta;
    } else if (std::holds_alternative<DigitQuantizerSpec>(quantizer)) {
        tc.delta_tilde = std::nan("");
        tc.quantizer_covered = false;
    }

    if (tc.quantizer_covered) {
        if (tc.delta_tilde == 0.0)
            tc.gamma_env = 0.0;
        else if (tc.eta && envelope_gamma(*tc.eta) < 1.0)
            tc.gamma_env = envelope_gamma(*tc.eta);
        const double ac2 = alpha * tc.c2;
        tc.envelope_floor = 8.0 * (tc.c3 + tc.c4 * tc.delta_tilde + tc.c5 * tc.delta_tilde) / (ac2 * ac2);
        if (tc.gamma_env) tc.rho = std::max({tc.beta, *tc.gamma_env, 1.0 - ac2 / 2.0});
    }

    tc.compliant = alpha < 1.0 / tc.lipschitz && alpha <= tc.c6;
    tc.nu_below_one = tc.nu < 1.0;
    return tc;
}

namespace {

void require_contraction(const TheoryConstants &tc) {
    if (!(tc.c1 < 1.0)) throw ConfigError("bound undefined: c1 >= 1");
    if (!tc.quantizer_covered) throw ConfigError("bound undefined for the significant-digit quantizer");
}

double powu(double base, std::size_t e) { return std::pow(base, static_cast<double>(e)); }

}    // namespace

double bound_mean_error(const TheoryConstants &tc, std::size_t k, std::size_t t, double initial_err) {
    require_contraction(tc);
    const double bt = powu(tc.beta, t);
    const double td = static_cast<double>(t) * tc.delta_tilde;
    const double denom = 1.0 - tc.c1;
    return powu(tc.c1, k) * initial_err + tc.c3 * bt / denom + tc.c4 * bt * td / denom + tc.c5 * td / denom;
}

double bound_local_error(const TheoryConstants &tc, std::size_t k, std::size_t t, double initial_err,
                         LocalIterate which) {
    require_contraction(tc);
    const double bt = powu(tc.beta, t);
    const double td = static_cast<double>(t) * tc.delta_tilde;
    const double denom = 1.0 - tc.c1;
    const double sqrt_n = std::sqrt(static_cast<double>(tc.n));
    const double head = powu(tc.c1, k) * initial_err + (tc.c3 / denom + tc.D) * bt +
                        (tc.c4 / denom + 2.0 / tc.nu) * bt * td;
    if (which == LocalIterate::x_agent) return head + (tc.c5 / denom + (sqrt_n + 1.0) / sqrt_n) * td;
    return head + (tc.c5 / denom + 4.0 / tc.nu + (2.0 * sqrt_n + 1.0) / sqrt_n) * td + 2.0 * tc.D;
}

double iterate_bound_y(const TheoryConstants &tc, double t_delta) { return tc.D + 2.0 * t_delta / tc.nu; }

double iterate_bound_x(const TheoryConstants &tc, double t_delta) {
    return tc.D + (1.0 + 2.0 / tc.nu) * t_delta;
}

double deviation_bound_x(const TheoryConstants &tc, std::size_t t, double t_delta) {
    const double bt = powu(tc.beta, t);
    const double sqrt_n = std::sqrt(static_cast<double>(tc.n));
    return bt * tc.D + (2.0 * bt / tc.nu + (sqrt_n + 1.0) / sqrt_n) * t_delta;
}

double deviation_bound_y(const TheoryConstants &tc, std::size_t t, double t_delta) {
    const double bt = powu(tc.beta, t);
    return bt * tc.D + 2.0 * tc.D + (2.0 * bt / tc.nu + 4.0 / tc.nu + 2.0) * t_delta;
}

double envelope_constant(const TheoryConstants &tc, double initial_err) {
    return std::max(initial_err, tc.envelope_floor);
}

std::optional<double> r_linear_envelope(const TheoryConstants &tc, std::size_t k, double initial_err) {
    if (!tc.rho) return std::nullopt;
    return envelope_constant(tc, initial_err) * powu(*tc.rho, k);
}

}    // namespace nearq
