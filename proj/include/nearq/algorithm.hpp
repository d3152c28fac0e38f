#pragma once

#include "nearq/metrics.hpp"
#include "nearq/problem.hpp"
#include "nearq/quantization.hpp"
#include "nearq/theory.hpp"
#include "nearq/topology.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nearq {

/// Number of quantized consensus rounds t(k) performed at outer iteration k.
///
/// fixed(t): t rounds every iteration.
/// linear: t(k) = k, with t(0) = 1 so that every iteration mixes at least once.
/// doubling(b, c): b rounds initially, doubled every c iterations.
class ConsensusSchedule {
public:
    enum class Kind { fixed, linear, doubling };

    static ConsensusSchedule fixed(std::size_t t);
    static ConsensusSchedule linear();
    static ConsensusSchedule doubling(std::size_t initial, std::size_t period);

    Kind kind() const noexcept { return kind_; }
    std::size_t rounds(std::size_t k) const;
    std::string to_string() const;

private:
    Kind kind_ = Kind::fixed;
    std::size_t initial_ = 1;
    std::size_t period_ = 1;
};

/// NEAR-DGD+(a,b,c) method label: a gradient steps per outer iteration, b initial
/// consensus rounds doubled every c iterations; c = "k" selects the linear schedule.
struct MethodSpec {
    unsigned grad_steps = 1;
    ConsensusSchedule schedule = ConsensusSchedule::fixed(1);

    /// Accepts "NEAR-DGD+(a,b,c)", "(a,b,c)", "fixed(t)" and "linear".
    static MethodSpec parse(std::string_view text);
};

struct AlgorithmConfig {
    double alpha = 0.0;
    ConsensusSchedule schedule = ConsensusSchedule::fixed(1);
    unsigned grad_steps = 1;
    Quantizer quantizer = IdentityQuantizer{};
    std::size_t max_iter = 0;
    /// Stacked initial iterate y_0; empty means every agent starts at 0.
    std::vector<double> y0;
    MessageModel message_model = MessageModel::directed_edges;
    /// Keep y_k, x_k and the per-round quantization errors of every iteration.
    bool record_states = false;
};

/// Result of t nested quantize-then-mix rounds.
struct ConsensusResult {
    std::vector<double> x;
    std::vector<std::vector<double>> eps;    // eps[j] = q^{j+1} - (input of round j+1)
    std::size_t clamp_events = 0;
};

/// q^1 = Q[y], x^1 = Z q^1, q^j = Q[x^{j-1}], x^j = Z q^j for j = 2..t.
/// `k` selects the quantizer's schedule entry; the counter advances once per round.
ConsensusResult quantized_consensus(std::span<const double> y, std::size_t t, const Quantizer &quantizer,
                                    const MixingMatrix &w, std::size_t p, std::size_t k,
                                    TransmissionCounter &counter,
                                    MessageModel model = MessageModel::directed_edges);

/// y_i = x_i - alpha (A_i x_i + b_i) for every block; adds n to `grad_evals`.
std::vector<double> gradient_step(std::span<const double> x, double alpha, const QuadraticProblem &prob,
                                  std::uint64_t &grad_evals);

/// Per-iteration measurements. Row k describes x_k, the output of the consensus
/// phase of iteration k, and the resources spent to produce it.
struct IterationRecord {
    std::size_t k = 0;
    std::size_t rounds = 0;
    std::uint64_t digits_iter = 0;
    std::uint64_t digits_cum = 0;
    std::uint64_t messages_cum = 0;
    std::uint64_t grad_evals_cum = 0;
    std::uint64_t clamp_events_cum = 0;

    std::vector<double> x_mean;    // xbar_k
    std::vector<double> y_mean;    // ybar_k
    std::vector<double> g_mean;    // (1/n) sum_i grad f_i(x_{i,k}), summed over inner gradient steps

    double rel_err_mean = 0.0;          // ||xbar_k - x*||^2 / ||x*||^2
    double rel_err_worst_agent = 0.0;   // max_i ||x_{i,k} - x*||^2 / ||x*||^2
    double consensus_dev = 0.0;         // max_i ||x_{i,k} - xbar_k||
    double consensus_dev_rms = 0.0;
    double err_mean = 0.0;              // ||xbar_k - x*||
    double err_worst_x = 0.0;           // max_i ||x_{i,k} - x*||
    double err_worst_y = 0.0;           // max_i ||y_{i,k} - x*||
    double dev_y = 0.0;                 // max_i ||y_{i,k} - ybar_k||
    double norm_x = 0.0;                // ||x_k||
    double norm_y = 0.0;                // ||y_k||
    double t_delta = 0.0;               // t(k) * delta_tilde_k

    double bound_neighbourhood = 0.0;    // fixed-t mean-error bound; NaN when not applicable
    double bound_envelope = 0.0;         // C rho^k; NaN when not applicable
};

struct StateRecord {
    std::vector<double> y;
    std::vector<double> x;
    std::vector<std::vector<double>> eps;
};

struct Trace {
    std::size_t n = 0;
    std::size_t p = 0;
    double alpha = 0.0;
    unsigned grad_steps = 1;
    ConsensusSchedule schedule = ConsensusSchedule::fixed(1);
    std::string quantizer;
    TheoryConstants theory;
    double x_star_norm = 0.0;
    std::vector<IterationRecord> rows;
    std::vector<StateRecord> states;
    std::vector<std::string> warnings;
    std::optional<std::string> divergence;    // set when the guard stopped the run
};

/// Bounded-iterate radius inflated by a safety factor: the run stops once ||y_k|| exceeds it.
double divergence_threshold(const TheoryConstants &tc, double t_delta_max);

/// sup_k t(k) * (spacing_k / spacing_0) over the first max_iter iterations (>= 1).
double effective_rounds(const ConsensusSchedule &schedule, const std::optional<double> &eta, std::size_t max_iter);

/// Symmetric interval [-h, h] sized so that every iterate allowed by the
/// bounded-iterate radius stays inside with the given safety factor:
/// h = safety * (D + (1 + 2/nu) t_eff sqrt(np) Delta(h)). When no finite h
/// solves this (too few bits), one fixed-point pass from h = safety*D is used
/// and clamping is left to the audit counter.
UniformQuantizerSpec auto_sized_quantizer(const QuadraticProblem &prob, const MixingMatrix &w, double alpha,
                                          std::span<const double> y0, unsigned base_bits,
                                          std::optional<double> eta, const ConsensusSchedule &schedule,
                                          std::size_t max_iter, double safety = 2.0);

/// Alternates quantized consensus (t(k) rounds) and gradient steps.
Trace run(const AlgorithmConfig &config, const QuadraticProblem &prob, const MixingMatrix &w);

/// max_k ||ybar_{k+1} - (xbar_k - alpha g_k)|| / max(1, ||xbar_k||).
double mean_dynamics_check(const Trace &trace);

/// Replays x_k^t = Z^t y_k + sum_j Z^{t-j} eps_k^j from the recorded states and
/// returns max_k ||replay - x_k|| / max(1, ||x_k||). Throws when states were not recorded.
double error_decomposition_check(const Trace &trace, const MixingMatrix &w);

/// Errors below 1e4 * machine epsilon * max(1, ||x*||) are rounding noise; error
/// bounds smaller than this are not checked.
double resolution_floor(const Trace &trace);

struct BoundCheck {
    std::string name;
    bool applicable = false;
    std::size_t checked = 0;    // error bounds under resolution_floor are skipped
    std::size_t violations = 0;
    double worst_ratio = 0.0;    // max empirical / bound
};

/// Checks a trace against every bound that applies to its configuration:
/// bounded iterates, bounded deviation, mean neighbourhood, per-agent x and y
/// neighbourhoods (fixed t, fixed uniform or no quantization, one gradient
/// step) and the R-linear envelope (linear schedule, adaptive or no quantization).
std::vector<BoundCheck> verify_bounds(const Trace &trace);

/// Trace CSV: k,t_k,digits_iter,digits_cum,messages_cum,grad_evals_cum,rel_err_mean,
/// rel_err_worst_agent,consensus_dev,err_mean,bound_neighbourhood,bound_envelope,clamp_events
std::string trace_csv_header();
std::string trace_to_csv(const Trace &trace);

}    // namespace nearq
