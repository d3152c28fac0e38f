#include "nearq/algorithm.hpp"

#include "nearq/error.hpp"
#include "nearq/text_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace nearq {

ConsensusSchedule ConsensusSchedule::fixed(std::size_t t) {
    if (t < 1) throw ConfigError("fixed schedule needs t >= 1");
    ConsensusSchedule s;
    s.kind_ = Kind::fixed;
    s.initial_ = t;
    return s;
}

ConsensusSchedule ConsensusSchedule::linear() {
    ConsensusSchedule s;
    s.kind_ = Kind::linear;
    return s;
}

ConsensusSchedule ConsensusSchedule::doubling(std::size_t initial, std::size_t period) {
    if (initial < 1 || period < 1) throw ConfigError("doubling schedule needs b >= 1 and c >= 1");
    ConsensusSchedule s;
    s.kind_ = Kind::doubling;
    s.initial_ = initial;
    s.period_ = period;
    return s;
}

std::size_t ConsensusSchedule::rounds(std::size_t k) const {
    switch (kind_) {
    case Kind::fixed: return initial_;
    case Kind::linear: return std::max<std::size_t>(k, 1);
    case Kind::doubling: {
        const auto doublings = k / period_;
        if (doublings >= 62 || initial_ > (std::numeric_limits<std::size_t>::max() >> doublings))
            return std::numeric_limits<std::size_t>::max();
        return initial_ << doublings;
    }
    }
    return 1;
}

std::string ConsensusSchedule::to_string() const {
    switch (kind_) {
    case Kind::fixed: return "fixed(" + std::to_string(initial_) + ")";
    case Kind::linear: return "linear";
    case Kind::doubling: return "doubling(" + std::to_string(initial_) + "," + std::to_string(period_) + ")";
    }
    return "?";
}

namespace {

std::size_t parse_count(std::string_view s, const char *what) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        throw ConfigError(std::string("expected a positive integer for ") + what + ", got '" + std::string(s) + "'");
    const auto v = std::stoull(std::string(s));
    if (v < 1) throw ConfigError(std::string(what) + " must be >= 1");
    return static_cast<std::size_t>(v);
}

}    // namespace

MethodSpec MethodSpec::parse(std::string_view text) {
    if (text == "linear") return {1, ConsensusSchedule::linear()};
    if (text.starts_with("fixed(") && text.ends_with(")"))
        return {1, ConsensusSchedule::fixed(parse_count(text.substr(6, text.size() - 7), "t"))};
    for (std::string_view prefix : {"NEAR-DGD+", "NEAR-DGD^+"}) {
        if (text.starts_with(prefix)) {
            text.remove_prefix(prefix.size());
            break;
        }
    }
    if (!text.starts_with("(") || !text.ends_with(")")) throw ConfigError("unrecognized method '" + std::string(text) + "'");
    const auto parts = text_io::split(text.substr(1, text.size() - 2), ',');
    if (parts.size() != 3) throw ConfigError("method needs three parameters (a,b,c)");
    MethodSpec m;
    m.grad_steps = static_cast<unsigned>(parse_count(parts[0], "a"));
    const auto b = parse_count(parts[1], "b");
    auto c = parts[2];
    while (!c.empty() && c.front() == ' ') c.remove_prefix(1);
    while (!c.empty() && c.back() == ' ') c.remove_suffix(1);
    if (c == "k") {
        if (b != 1) throw ConfigError("(a,b,k) is the linear schedule t(k) = k and requires b = 1");
        m.schedule = ConsensusSchedule::linear();
    } else {
        m.schedule = ConsensusSchedule::doubling(b, parse_count(c, "c"));
    }
    return m;
}

namespace {

std::uint64_t messages_per_round(const MixingMatrix &w, MessageModel model) {
    return model == MessageModel::directed_edges ? w.directed_links() : w.size();
}

// Core of quantized_consensus; `eps` may be null when the errors are not needed.
std::vector<double> consensus_rounds(std::span<const double> y, std::size_t t, const Quantizer &quantizer,
                                     const MixingMatrix &w, std::size_t p, std::size_t k,
                                     TransmissionCounter &counter, MessageModel model,
                                     std::vector<std::vector<double>> *eps, std::size_t &clamps) {
    if (t < 1) throw ConfigError("quantized consensus needs t >= 1");
    if (y.size() != w.size() * p) throw DimensionError("quantized consensus: expected n*p entries");
    const auto msgs = messages_per_round(w, model);
    const auto symbols = symbols_per_coordinate(quantizer, k);
    std::vector<double> cur(y.begin(), y.end());
    std::vector<double> q(y.size());
    for (std::size_t j = 0; j < t; ++j) {
        clamps += apply_quantizer(quantizer, cur, k, q);
        if (eps) {
            auto &e = eps->emplace_back(cur.size());
            for (std::size_t c = 0; c < cur.size(); ++c) e[c] = q[c] - cur[c];
        }
        mix_into(w, q, cur, p);
        counter.record_round(msgs, p, symbols);
    }
    return cur;
}

}    // namespace

ConsensusResult quantized_consensus(std::span<const double> y, std::size_t t, const Quantizer &quantizer,
                                    const MixingMatrix &w, std::size_t p, std::size_t k,
                                    TransmissionCounter &counter, MessageModel model) {
    ConsensusResult res;
    res.x = consensus_rounds(y, t, quantizer, w, p, k, counter, model, &res.eps, res.clamp_events);
    return res;
}

std::vector<double> gradient_step(std::span<const double> x, double alpha, const QuadraticProblem &prob,
                                  std::uint64_t &grad_evals) {
    if (!(alpha > 0.0)) throw ConfigError("gradient_step: alpha must be positive");
    const auto n = prob.nodes();
    const auto p = prob.dim();
    if (x.size() != n * p) throw DimensionError("gradient_step: expected n*p entries");
    std::vector<double> out(x.size());
    std::vector<double> g(p);
    for (std::size_t i = 0; i < n; ++i) {
        local_gradient_into(prob, i, x.subspan(i * p, p), g);
        for (std::size_t c = 0; c < p; ++c) out[i * p + c] = x[i * p + c] - alpha * g[c];
    }
    grad_evals += n;
    return out;
}

double divergence_threshold(const TheoryConstants &tc, double t_delta_max) {
    return 1e6 * (tc.D + 2.0 * t_delta_max / tc.nu);
}

double effective_rounds(const ConsensusSchedule &schedule, const std::optional<double> &eta, std::size_t max_iter) {
    double best = 1.0;
    double decay = 1.0;
    for (std::size_t k = 0; k < max_iter; ++k) {
        best = std::max(best, static_cast<double>(schedule.rounds(k)) * decay);
        if (eta) decay *= *eta;
    }
    return best;
}

UniformQuantizerSpec auto_sized_quantizer(const QuadraticProblem &prob, const MixingMatrix &w, double alpha,
                                          std::span<const double> y0, unsigned base_bits,
                                          std::optional<double> eta, const ConsensusSchedule &schedule,
                                          std::size_t max_iter, double safety) {
    if (base_bits < 1) throw ConfigError("uniform quantizer needs at least 1 base bit");
    const auto tc = compute_constants(prob, w, alpha, y0, IdentityQuantizer{});
    const double t_eff = effective_rounds(schedule, eta, max_iter);
    const double gaps = std::ldexp(1.0, static_cast<int>(base_bits)) - 1.0;
    const double sqrt_np = std::sqrt(static_cast<double>(prob.nodes() * prob.dim()));
    const double growth = (1.0 + 2.0 / tc.nu) * t_eff * sqrt_np;
    // Delta(h) = 2h / gaps, so h = safety * (D + growth * 2h / gaps).
    const double coef = safety * growth * 2.0 / gaps;
    double half;
    if (coef < 1.0) {
        half = safety * tc.D / (1.0 - coef);
    } else {
        const double h0 = safety * tc.D;
        half = safety * (tc.D + growth * 2.0 * h0 / gaps);
    }
    UniformQuantizerSpec spec{-half, half, base_bits, eta};
    spec.validate();
    return spec;
}

namespace {

double row_t_delta(const Quantizer &quantizer, std::size_t n, std::size_t p, std::size_t k, std::size_t t) {
    if (const auto *u = std::get_if<UniformQuantizerSpec>(&quantizer))
        return static_cast<double>(t) * std::sqrt(static_cast<double>(n * p)) * adaptive_spacing(*u, k);
    if (std::holds_alternative<IdentityQuantizer>(quantizer)) return 0.0;
    return std::nan("");
}

void validate_quantizer(const Quantizer &quantizer) {
    if (const auto *u = std::get_if<UniformQuantizerSpec>(&quantizer)) u->validate();
    if (const auto *d = std::get_if<DigitQuantizerSpec>(&quantizer)) d->validate();
}

bool fixed_bounds_apply(const Trace &trace) {
    return trace.schedule.kind() == ConsensusSchedule::Kind::fixed && trace.grad_steps == 1 &&
           trace.theory.quantizer_covered && !trace.theory.eta && trace.theory.c1 < 1.0 && trace.theory.compliant;
}

bool envelope_applies(const Trace &trace) {
    return trace.schedule.kind() == ConsensusSchedule::Kind::linear && trace.grad_steps == 1 &&
           trace.theory.rho.has_value() && trace.theory.compliant;
}

}    // namespace

Trace run(const AlgorithmConfig &config, const QuadraticProblem &prob, const MixingMatrix &w) {
    const auto n = prob.nodes();
    const auto p = prob.dim();
    if (w.size() != n) throw DimensionError("mixing matrix has " + std::to_string(w.size()) + " nodes, problem has " +
                                            std::to_string(n));
    if (!(config.alpha > 0.0)) throw ConfigError("steplength alpha must be positive");
    if (config.grad_steps < 1) throw ConfigError("at least one gradient step per iteration is required");
    validate_quantizer(config.quantizer);

    std::vector<double> y = config.y0.empty() ? std::vector<double>(n * p, 0.0) : config.y0;
    if (y.size() != n * p) throw DimensionError("initial iterate must have n*p entries");

    Trace trace;
    trace.n = n;
    trace.p = p;
    trace.alpha = config.alpha;
    trace.grad_steps = config.grad_steps;
    trace.schedule = config.schedule;
    trace.quantizer = describe(config.quantizer);
    trace.theory = compute_constants(prob, w, config.alpha, y, config.quantizer);
    const auto &tc = trace.theory;

    if (!tc.compliant) {
        trace.warnings.push_back("steplength " + text_io::format_double(config.alpha) +
                                 " exceeds the guaranteed range min{1/L, c6} = " +
                                 text_io::format_double(std::min(1.0 / tc.lipschitz, tc.c6)));
    }
    if (!tc.quantizer_covered)
        trace.warnings.push_back("significant-digit quantization has no absolute error bound; theory columns are nan");

    const double t_eff = effective_rounds(config.schedule, tc.eta, config.max_iter);
    const double guard = divergence_threshold(tc, tc.quantizer_covered ? t_eff * tc.delta_tilde : 0.0);
    const bool with_neighbourhood = fixed_bounds_apply(trace);
    const bool with_envelope = envelope_applies(trace);

    const auto x_star = std::span<const double>(prob.x_star().data(), p);
    const double x_star_sq = [&] {
        double s = 0.0;
        for (double v : x_star) s += v * v;
        return s;
    }();
    trace.x_star_norm = std::sqrt(x_star_sq);
    auto relative = [&](double dist) { return x_star_sq > 0.0 ? dist * dist / x_star_sq : dist * dist; };

    TransmissionCounter counter;
    std::uint64_t grad_evals = 0;
    std::uint64_t clamps = 0;
    std::vector<double> g(p);

    for (std::size_t k = 0; k < config.max_iter; ++k) {
        const double ynorm = euclidean_norm(y);
        if (!std::isfinite(ynorm) || ynorm > guard) {
            trace.divergence = "divergence guard fired at iteration " + std::to_string(k) + ": ||y_k|| = " +
                               text_io::format_double(ynorm) + " > " + text_io::format_double(guard);
            break;
        }

        const auto t = config.schedule.rounds(k);
        const auto digits_before = counter.digits_sent;
        std::vector<std::vector<double>> eps;
        std::size_t round_clamps = 0;
        auto x = consensus_rounds(y, t, config.quantizer, w, p, k, counter, config.message_model,
                                  config.record_states ? &eps : nullptr, round_clamps);
        clamps += round_clamps;

        IterationRecord row;
        row.k = k;
        row.rounds = t;
        row.digits_iter = counter.digits_sent - digits_before;
        row.digits_cum = counter.digits_sent;
        row.messages_cum = counter.messages;
        row.grad_evals_cum = grad_evals;
        row.clamp_events_cum = clamps;
        row.x_mean = block_mean(x, p);
        row.y_mean = block_mean(y, p);
        row.err_mean = distance(row.x_mean, x_star);
        row.rel_err_mean = relative(row.err_mean);
        for (std::size_t i = 0; i < n; ++i) {
            const auto xi = std::span<const double>(x).subspan(i * p, p);
            const auto yi = std::span<const double>(y).subspan(i * p, p);
            row.err_worst_x = std::max(row.err_worst_x, distance(xi, x_star));
            row.err_worst_y = std::max(row.err_worst_y, distance(yi, x_star));
            row.dev_y = std::max(row.dev_y, distance(yi, row.y_mean));
        }
        row.rel_err_worst_agent = relative(row.err_worst_x);
        const auto dev = consensus_deviation(x, p);
        row.consensus_dev = dev.max;
        row.consensus_dev_rms = dev.rms;
        row.norm_x = euclidean_norm(x);
        row.norm_y = ynorm;
        row.t_delta = row_t_delta(config.quantizer, n, p, k, t);

        const double e0 = trace.rows.empty() ? row.err_mean : trace.rows.front().err_mean;
        row.bound_neighbourhood = with_neighbourhood ? bound_mean_error(tc, k, t, e0) : std::nan("");
        row.bound_envelope = with_envelope ? r_linear_envelope(tc, k, e0).value() : std::nan("");

        std::vector<double> cur = x;
        row.g_mean.assign(p, 0.0);
        for (unsigned s = 0; s < config.grad_steps; ++s) {
            std::vector<double> step_mean(p, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                local_gradient_into(prob, i, std::span<const double>(cur).subspan(i * p, p), g);
                for (std::size_t c = 0; c < p; ++c) {
                    cur[i * p + c] = cur[i * p + c] - config.alpha * g[c];
                    step_mean[c] += g[c];
                }
            }
            for (std::size_t c = 0; c < p; ++c) row.g_mean[c] += step_mean[c] / static_cast<double>(n);
            grad_evals += n;
        }

        if (config.record_states) trace.states.push_back({std::move(y), std::move(x), std::move(eps)});
        trace.rows.push_back(std::move(row));
        y = std::move(cur);
    }
    return trace;
}

double mean_dynamics_check(const Trace &trace) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k) {
        const auto &cur = trace.rows[k];
        const auto &next = trace.rows[k + 1];
        double sq = 0.0;
        for (std::size_t c = 0; c < trace.p; ++c) {
            const double d = next.y_mean[c] - (cur.x_mean[c] - trace.alpha * cur.g_mean[c]);
            sq += d * d;
        }
        worst = std::max(worst, std::sqrt(sq) / std::max(1.0, euclidean_norm(cur.x_mean)));
    }
    return worst;
}

double error_decomposition_check(const Trace &trace, const MixingMatrix &w) {
    if (trace.states.size() != trace.rows.size())
        throw ConfigError("error_decomposition_check needs a trace recorded with record_states");
    const auto p = trace.p;
    auto power = [&](std::vector<double> v, std::size_t times) {
        for (std::size_t s = 0; s < times; ++s) v = mix(w, v, p);
        return v;
    };
    double worst = 0.0;
    for (const auto &st : trace.states) {
        const auto t = st.eps.size();
        auto replay = power(st.y, t);
        for (std::size_t j = 0; j < t; ++j) {
            const auto term = power(st.eps[j], t - j);
            for (std::size_t c = 0; c < replay.size(); ++c) replay[c] += term[c];
        }
        worst = std::max(worst, distance(replay, st.x) / std::max(1.0, euclidean_norm(st.x)));
    }
    return worst;
}

double resolution_floor(const Trace &trace) {
    return 1e4 * std::numeric_limits<double>::epsilon() * std::max(1.0, trace.x_star_norm);
}

std::vector<BoundCheck> verify_bounds(const Trace &trace) {
    const auto &tc = trace.theory;
    const bool fixed = fixed_bounds_apply(trace);
    const bool linear = envelope_applies(trace);

    std::vector<BoundCheck> checks = {
        {"bounded_iterates", fixed}, {"bounded_deviation", fixed}, {"mean_neighbourhood", fixed},
        {"agent_x_neighbourhood", fixed}, {"agent_y_neighbourhood", fixed}, {"r_linear_envelope", linear},
    };
    auto observe = [](BoundCheck &c, double empirical, double bound) {
        ++c.checked;
        if (empirical > bound) ++c.violations;
        if (bound > 0.0) c.worst_ratio = std::max(c.worst_ratio, empirical / bound);
    };

    if (trace.rows.empty()) return checks;
    const double e0 = trace.rows.front().err_mean;
    const double floor = resolution_floor(trace);
    // Error bounds below the floor cannot be resolved in double precision.
    auto observe_error = [&](BoundCheck &c, double empirical, double bound) {
        if (bound >= floor) observe(c, empirical, bound);
    };
    for (const auto &row : trace.rows) {
        if (fixed) {
            const auto t = row.rounds;
            const double td = static_cast<double>(t) * tc.delta_tilde;
            observe(checks[0], row.norm_y, iterate_bound_y(tc, td));
            observe(checks[0], row.norm_x, iterate_bound_x(tc, td));
            observe(checks[1], row.consensus_dev, deviation_bound_x(tc, t, td));
            observe(checks[1], row.dev_y, deviation_bound_y(tc, t, td));
            observe_error(checks[2], row.err_mean, bound_mean_error(tc, row.k, t, e0));
            observe_error(checks[3], row.err_worst_x, bound_local_error(tc, row.k, t, e0, LocalIterate::x_agent));
            observe_error(checks[4], row.err_worst_y, bound_local_error(tc, row.k, t, e0, LocalIterate::y_agent));
        }
        if (linear) observe_error(checks[5], row.err_mean, r_linear_envelope(tc, row.k, e0).value());
    }
    return checks;
}

std::string trace_csv_header() {
    return "k,t_k,digits_iter,digits_cum,messages_cum,grad_evals_cum,rel_err_mean,rel_err_worst_agent,"
           "consensus_dev,err_mean,bound_neighbourhood,bound_envelope,clamp_events\n";
}

std::string trace_to_csv(const Trace &trace) {
    using text_io::format_double;
    std::string out = trace_csv_header();
    for (const auto &r : trace.rows) {
        out += std::to_string(r.k) + "," + std::to_string(r.rounds) + "," + std::to_string(r.digits_iter) + "," +
               std::to_string(r.digits_cum) + "," + std::to_string(r.messages_cum) + "," +
               std::to_string(r.grad_evals_cum) + "," + format_double(r.rel_err_mean) + "," +
               format_double(r.rel_err_worst_agent) + "," + format_double(r.consensus_dev) + "," +
               format_double(r.err_mean) + "," + format_double(r.bound_neighbourhood) + "," + format_double(r.bound_envelope) +
               "," + std::to_string(r.clamp_events_cum) + "\n";
    }
    return out;
}

}    // namespace nearq
