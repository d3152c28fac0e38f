// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "nearq/algorithm.hpp"
#include "nearq/experiment.hpp"
#include "nearq/text_io.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

using namespace nearq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Instance {
    QuadraticProblem prob;
    MixingMatrix w = metropolis_weights(build_topology(TopologySpec::parse("k_cyclic(4)"), 10));
    explicit Instance(std::uint64_t seed) : prob(generate_quadratic(10, 10, 2.0, seed)) {}

    AlgorithmConfig config(std::size_t max_iter, ConsensusSchedule schedule) const {
        AlgorithmConfig c;
        c.alpha = 0.95 * step_limit(prob);
        c.max_iter = max_iter;
        c.schedule = schedule;
        return c;
    }
    UniformQuantizerSpec uniform(const AlgorithmConfig &c, unsigned bits, std::optional<double> eta) const {
        return auto_sized_quantizer(prob, w, c.alpha, std::vector<double>(prob.nodes() * prob.dim(), 0.0), bits, eta,
                                    c.schedule, c.max_iter);
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const BoundCheck &find_check(const std::vector<BoundCheck> &checks, const std::string &name) {
    for (const auto &c : checks)
        if (c.name == name) return c;
    throw std::logic_error("no check " + name);
}

Outcome mixing_matrices() {
    Outcome o;
    std::size_t graphs = 0;
    double worst_beta_gap = 0.0;
    auto check = [&](const TopologySpec &kind, std::size_t n) {
        MixingMatrix w = metropolis_weights(build_topology(kind, n));
        oracle::Dense d(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                d[i][j] = w(i, j);
                if (w(i, j) != w(j, i)) o.pass = false;
                row += w(i, j);
                col += w(j, i);
            }
            if (std::abs(row - 1.0) > 1e-12 || std::abs(col - 1.0) > 1e-12) o.pass = false;
        }
        if (!(w.beta() < 1.0)) o.pass = false;
        worst_beta_gap = std::max(worst_beta_gap, std::abs(w.beta() - oracle::second_largest_magnitude(d)));
        ++graphs;
    };
    for (std::size_t n = 3; n <= 12; ++n)
        for (TopologyKind k : {TopologyKind::cycle, TopologyKind::complete, TopologyKind::star, TopologyKind::path})
            check({k, 0}, n);
    check({TopologyKind::k_cyclic, 4}, 10);
    if (worst_beta_gap > 1e-10) o.pass = false;
    o.detail = std::to_string(graphs) + " graphs, max |beta - oracle| = " + fmt(worst_beta_gap);
    return o;
}

Outcome quantizer_contract() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 100);
    std::uniform_int_distribution<unsigned> bits(1, 16);
    std::uniform_int_distribution<std::size_t> iter(0, 20);
    std::size_t coord = 0, vec = 0;
    for (int draw = 0; draw < 10000; ++draw) {
        const double l = -10.0 + 10.0 * unit(rng);
        const double u = l + 0.01 + 20.0 * unit(rng);
        UniformQuantizerSpec s{l, u, bits(rng), std::nullopt};
        if (draw % 2) s.eta = 0.5;
        const std::size_t k = iter(rng);
        std::vector<double> z(dim(rng));
        for (auto &v : z) v = l + (u - l) * unit(rng);
        auto q = quantize_uniform(z, s, k);
        const double delta = adaptive_spacing(s, k);
        double sq = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (std::abs(q.err[i]) > delta) ++coord;
            sq += q.err[i] * q.err[i];
        }
        if (std::sqrt(sq) > delta * std::sqrt(static_cast<double>(z.size()))) ++vec;
    }
    std::size_t spacing = 0;
    for (unsigned b0 : {1u, 2u, 8u, 16u}) {
        UniformQuantizerSpec s{-3.0, 5.0, b0, std::nullopt};
        for (unsigned b = 0; b <= 20; ++b)
            if (spacing_for_bits(s, b) > std::ldexp(s.base_spacing(), -static_cast<int>(b))) ++spacing;
    }
    o.pass = coord == 0 && vec == 0 && spacing == 0;
    o.detail = "10000 vectors: " + std::to_string(coord) + " coordinate, " + std::to_string(vec) + " vector, " +
               std::to_string(spacing) + " spacing violations";
    return o;
}

Outcome exact_identities() {
    Outcome o;
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> rounds(1, 8);
    double worst_mean = 0.0, worst_decomp = 0.0;
    for (int r = 0; r < 20; ++r) {
        Instance inst(300 + r);
        AlgorithmConfig c = inst.config(200, ConsensusSchedule::fixed(rounds(rng)));
        c.record_states = true;
        switch (r % 5) {
        case 0: c.quantizer = IdentityQuantizer{}; break;
        case 1: c.quantizer = inst.uniform(c, 10, std::nullopt); break;
        case 2: c.quantizer = inst.uniform(c, 6, 0.7); break;
        case 3: c.quantizer = DigitQuantizerSpec::fixed(3); break;
        default: c.quantizer = DigitQuantizerSpec{2, 1, 20}; break;
        }
        Trace tr = run(c, inst.prob, inst.w);
        worst_mean = std::max(worst_mean, mean_dynamics_check(tr));
        worst_decomp = std::max(worst_decomp, error_decomposition_check(tr, inst.w));
    }
    o.pass = worst_mean <= 1e-10 && worst_decomp <= 1e-10;
    o.detail = "20 runs, mean-dynamics residual " + fmt(worst_mean) + ", decomposition residual " + fmt(worst_decomp);
    return o;
}

// Plain NEAR-DGD on dense arrays: x = W^t y, then y = x - alpha (A_i x_i + b_i).
std::string reference_iterates(const QuadraticProblem &prob, const MixingMatrix &w, double alpha,
                               const std::function<std::size_t(std::size_t)> &rounds, std::size_t iters) {
    const std::size_t n = prob.nodes(), p = prob.dim();
    std::vector<double> y(n * p, 0.0), x(n * p), next(n * p);
    std::string out;
    for (std::size_t k = 0; k < iters; ++k) {
        x = y;
        for (std::size_t r = 0; r < rounds(k); ++r) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < p; ++c) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j)
                        if (w(i, j) != 0.0) acc += w(i, j) * x[j * p + c];
                    next[i * p + c] = acc;
                }
            x.swap(next);
        }
        out += text_io::join_doubles(y.data(), y.size()) + "\n" + text_io::join_doubles(x.data(), x.size()) + "\n";
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < p; ++r) {
                double acc = 0.0;
                for (std::size_t c = 0; c < p; ++c) acc += prob.a(i)(r, c) * x[i * p + c];
                const double g = acc + prob.b(i)(r);
                y[i * p + r] = x[i * p + r] - alpha * g;
            }
    }
    return out;
}

Outcome unquantized_recovery() {
    Outcome o;
    std::size_t compared = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst(seed);
        const std::vector<std::pair<ConsensusSchedule, std::function<std::size_t(std::size_t)>>> schedules = {
            {ConsensusSchedule::fixed(1), [](std::size_t) { return std::size_t{1}; }},
            {ConsensusSchedule::fixed(3), [](std::size_t) { return std::size_t{3}; }},
            {ConsensusSchedule::linear(), [](std::size_t k) { return std::max<std::size_t>(k, 1); }},
        };
        for (const auto &[schedule, rounds] : schedules) {
            AlgorithmConfig c = inst.config(120, schedule);
            c.record_states = true;
            Trace tr = run(c, inst.prob, inst.w);
            std::string engine;
            for (const auto &s : tr.states)
                engine += text_io::join_doubles(s.y.data(), s.y.size()) + "\n" +
                          text_io::join_doubles(s.x.data(), s.x.size()) + "\n";
            if (engine != reference_iterates(inst.prob, inst.w, c.alpha, rounds, 120)) o.pass = false;
            ++compared;
        }
    }
    o.detail = std::to_string(compared) + " iterate traces (5 seeds x fixed(1), fixed(3), linear) compared byte for byte";
    return o;
}

Outcome neighbourhood_domination() {
    Outcome o;
    std::size_t checked = 0, violations = 0, clamps = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst(seed);
        for (std::size_t t : {1, 2, 5}) {
            AlgorithmConfig c = inst.config(2001, ConsensusSchedule::fixed(t));
            c.quantizer = inst.uniform(c, 12, std::nullopt);
            Trace tr = run(c, inst.prob, inst.w);
            if (!tr.theory.compliant || tr.rows.size() != 2001) o.pass = false;
            clamps += tr.rows.back().clamp_events_cum;
            auto checks = verify_bounds(tr);
            for (const char *name : {"mean_neighbourhood", "agent_x_neighbourhood", "agent_y_neighbourhood",
                                     "bounded_iterates", "bounded_deviation"}) {
                const BoundCheck &b = find_check(checks, name);
                if (!b.applicable || b.checked < tr.rows.size()) o.pass = false;
                checked += b.checked;
                violations += b.violations;
                worst = std::max(worst, b.worst_ratio);
            }
        }
    }
    if (violations) o.pass = false;
    o.detail = std::to_string(checked) + " comparisons over 15 runs, " + std::to_string(violations) +
               " violations, max empirical/bound " + fmt(worst) + ", clamp events " + std::to_string(clamps);
    return o;
}

double plateau_level(const Trace &tr, double *variation) {
    double lo = HUGE_VAL, hi = 0.0, sum = 0.0;
    for (std::size_t k = tr.rows.size() - 100; k < tr.rows.size(); ++k) {
        const double e = tr.rows[k].rel_err_mean;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        sum += e;
    }
    *variation = hi > 0.0 ? (hi - lo) / hi : 0.0;
    return sum / 100.0;
}

Outcome plateau_ordering() {
    Outcome o;
    std::string levels;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst(seed);
        double prev = HUGE_VAL;
        for (unsigned d : {2u, 4u, 8u}) {
            AlgorithmConfig c = inst.config(400, ConsensusSchedule::fixed(50));
            c.quantizer = DigitQuantizerSpec::fixed(d);
            Trace tr = run(c, inst.prob, inst.w);
            double variation = 0.0;
            const double level = plateau_level(tr, &variation);
            if (!(level > 0.0) || variation >= 0.1 || !(level < prev)) o.pass = false;
            prev = level;
            if (seed == 1) levels += (levels.empty() ? "" : " > ") + fmt(level);
        }
    }
    o.detail = "fixed t=50, 5 seeds; seed 1 plateaus Q(2),Q(4),Q(8): " + levels;
    return o;
}

Outcome r_linear_rate() {
    Outcome o;
    double worst_ratio = 0.0, worst_margin = -HUGE_VAL;
    std::size_t checked = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst(seed);
        AlgorithmConfig c = inst.config(60, ConsensusSchedule::linear());
        c.quantizer = inst.uniform(c, 8, 0.5);
        Trace tr = run(c, inst.prob, inst.w);
        const BoundCheck &env = find_check(verify_bounds(tr), "r_linear_envelope");
        if (!env.applicable || env.violations || env.checked != tr.rows.size()) o.pass = false;
        checked += env.checked;
        worst_ratio = std::max(worst_ratio, env.worst_ratio);

        // Least-squares slope of log error above the rounding floor.
        const double floor = resolution_floor(tr);
        double sk = 0, sl = 0, skk = 0, skl = 0, m = 0;
        for (const auto &r : tr.rows) {
            if (r.err_mean <= floor) break;
            const double k = static_cast<double>(r.k), l = std::log(r.err_mean);
            sk += k;
            sl += l;
            skk += k * k;
            skl += k * l;
            m += 1;
        }
        const double slope = (m * skl - sk * sl) / (m * skk - sk * sk);
        const double margin = slope - (std::log(*tr.theory.rho) + 0.05);
        worst_margin = std::max(worst_margin, margin);
        if (!(m >= 10) || margin > 0.0) o.pass = false;
        if (seed == 1)
            o.detail = "seed 1: rho " + fmt(*tr.theory.rho) + ", fitted slope " + fmt(slope) + " over " +
                       fmt(m) + " iterations; ";
    }
    o.detail += std::to_string(checked) + " envelope checks, max error/bound " + fmt(worst_ratio) +
                ", max slope - (log rho + 0.05) " + fmt(worst_margin);
    return o;
}

Outcome exact_convergence() {
    Outcome o;
    double worst_adaptive = 0.0, lowest_fixed = HUGE_VAL;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst(seed);
        AlgorithmConfig uni = inst.config(60, ConsensusSchedule::linear());
        uni.quantizer = inst.uniform(uni, 8, 0.5);
        AlgorithmConfig dig = inst.config(60, ConsensusSchedule::linear());
        dig.quantizer = DigitQuantizerSpec{2, 1, 2};
        for (const auto &c : {uni, dig})
            worst_adaptive = std::max(worst_adaptive, run(c, inst.prob, inst.w).rows.back().rel_err_mean);

        AlgorithmConfig fixed = inst.config(400, ConsensusSchedule::fixed(1));
        fixed.quantizer = DigitQuantizerSpec::fixed(2);
        Trace tr = run(fixed, inst.prob, inst.w);
        for (std::size_t k = 300; k < 400; ++k) lowest_fixed = std::min(lowest_fixed, tr.rows[k].rel_err_mean);
    }
    o.pass = worst_adaptive <= 1e-8 && lowest_fixed >= 1e-6;
    o.detail = "linear + adaptive (uniform eta=0.5, Q(2,1,2)) worst final rel err " + fmt(worst_adaptive) +
               "; fixed t=1 + Q(2) lowest late rel err " + fmt(lowest_fixed);
    return o;
}

struct CostPoint {
    bool reached = false;
    std::uint64_t digits = 0, grads = 0;
};

CostPoint cost_at_target(const Trace &tr, double target) {
    for (const auto &r : tr.rows)
        if (r.rel_err_mean <= target) return {true, r.digits_cum, r.grad_evals_cum};
    return {};
}

Outcome cost_regimes() {
    Outcome o;
    double worst_cheap = 0.0, worst_expensive = 0.0;
    const std::vector<std::tuple<std::string, ConsensusSchedule, Quantizer, std::size_t>> families = {
        {"(1,1,k)", ConsensusSchedule::linear(), DigitQuantizerSpec{2, 1, 2}, 60},
        {"(1,1,50)", ConsensusSchedule::doubling(1, 50), DigitQuantizerSpec{2, 1, 50}, 260},
    };
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Instance inst(seed);
        for (const auto &[label, schedule, quantizer, iters] : families) {
            AlgorithmConfig plain = inst.config(iters, schedule);
            plain.message_model = MessageModel::node_broadcast;
            AlgorithmConfig quant = plain;
            quant.quantizer = quantizer;
            const CostPoint p = cost_at_target(run(plain, inst.prob, inst.w), 1e-6);
            const CostPoint q = cost_at_target(run(quant, inst.prob, inst.w), 1e-6);
            if (!p.reached || !q.reached) {
                o.pass = false;
                continue;
            }
            const double pe = cost(p.digits, p.grads, {1e4, 1.0}), qe = cost(q.digits, q.grads, {1e4, 1.0});
            const double pc = cost(p.digits, p.grads, {1e-4, 1.0}), qc = cost(q.digits, q.grads, {1e-4, 1.0});
            if (!(qe < pe)) o.pass = false;
            const double cheap_gap = std::abs(qc - pc) / std::max(pc, qc);
            if (!(cheap_gap < 0.1)) o.pass = false;
            worst_cheap = std::max(worst_cheap, cheap_gap);
            worst_expensive = std::max(worst_expensive, qe / pe);
        }
    }
    o.detail = "NEAR-DGD+(1,1,k) with Q(2,1,2) and NEAR-DGD+(1,1,50) with Q(2,1,50), one broadcast per agent, 5 seeds: "
               "c_c=1e4 worst quantized/unquantized cost " +
               fmt(worst_expensive) + ", c_c=1e-4 worst gap " + fmt(100 * worst_cheap) + "%";
    return o;
}

std::map<std::string, std::string> snapshot(const fs::path &root) {
    std::map<std::string, std::string> files;
    for (const auto &e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = text_io::read_file(e.path());
    return files;
}

Outcome determinism() {
    Outcome o;
    const fs::path base = fs::temp_directory_path() / "nearq_acceptance_determinism";
    fs::remove_all(base);
    const ExperimentSpec spec = ExperimentSpec::parse(R"j({
        "version": 1, "problem": {"n": 10, "p": 10, "kappa": 2, "seed": 7}, "topology": "k_cyclic(4)",
        "max_iter": 150, "cost": {"c_g": 1, "c_c": [1e-4, 1e4]},
        "variants": [
          {"name": "exact", "method": "NEAR-DGD+(1,1,k)", "quantizer": "identity"},
          {"name": "digits", "method": "NEAR-DGD+(1,1,k)", "quantizer": "Q(2,1,2)"},
          {"name": "uniform", "method": "fixed(2)", "quantizer": "uniform(12)"}],
        "sweep": {"methods": ["fixed(1)", "NEAR-DGD+(1,1,20)"], "quantizers": ["Q(3,-,-)", "uniform(8,0.5)"]}})j");
    std::vector<std::map<std::string, std::string>> runs;
    for (unsigned jobs : {1u, 3u}) {
        CommandOptions opts;
        opts.out = base / ("jobs" + std::to_string(jobs));
        opts.jobs = jobs;
        int rc = cmd_generate(spec, opts);
        rc = std::max(rc, cmd_run(spec, opts));
        rc = std::max(rc, cmd_sweep(spec, opts));
        rc = std::max(rc, cmd_report(spec, opts));
        if (rc != exit_code::success) o.pass = false;
        runs.push_back(snapshot(opts.out));
    }
    if (runs[0] != runs[1] || runs[0].size() < 20) o.pass = false;
    fs::remove_all(base);
    o.detail = std::to_string(runs[0].size()) + " files from generate/run/sweep/report, identical across two runs "
               "(1 and 3 worker threads)";
    return o;
}

}    // namespace

int main() {
    struct Criterion {
        int id;
        const char *name;
        double budget_s;    // 0: no runtime limit
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "mixing-matrix properties", 1.0, mixing_matrices},
        {2, "quantizer contract", 5.0, quantizer_contract},
        {3, "exact identities", 10.0, exact_identities},
        {4, "unquantized recovery", 0.0, unquantized_recovery},
        {5, "neighbourhood bounds dominate", 30.0, neighbourhood_domination},
        {6, "plateau ordering", 0.0, plateau_ordering},
        {7, "R-linear envelope and rate", 30.0, r_linear_rate},
        {8, "exact convergence separation", 0.0, exact_convergence},
        {9, "cost regimes", 0.0, cost_regimes},
        {10, "end-to-end determinism", 0.0, determinism},
    };
    int failures = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && secs >= c.budget_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.budget_s) + " s budget";
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
                  << fmt(secs) << " s]" << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}
