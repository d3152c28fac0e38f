#include "nearq/experiment.hpp"

#include "nearq/error.hpp"
#include "nearq/text_io.hpp"
#include "nearq/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace nearq {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

unsigned parse_unsigned(std::string_view s, const char *what) {
    std::string t = trim(s);
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigError(std::string("expected a non-negative integer for ") + what + ", got '" + t + "'");
    return v;
}

std::vector<std::string> inner_args(std::string_view text, std::string_view prefix) {
    if (text.size() < prefix.size() + 2 || text.substr(0, prefix.size()) != prefix || text.back() != ')')
        return {};
    std::vector<std::string> out;
    for (auto part : text_io::split(text.substr(prefix.size(), text.size() - prefix.size() - 1), ','))
        out.push_back(trim(part));
    return out;
}

void check_keys(const json &obj, std::initializer_list<const char *> allowed, const std::string &where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char *k) { return it.key() == k; });
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double get_number(const json &v, const std::string &what) {
    if (!v.is_number()) throw ConfigError(what + " must be a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(what + " must be finite");
    return d;
}

std::uint64_t get_count(const json &v, const std::string &what) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(what + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const json &v, const std::string &what) {
    if (!v.is_string()) throw ConfigError(what + " must be a string");
    return v.get<std::string>();
}

QuantizerSetting parse_quantizer(const json &v, const std::string &where) {
    if (v.is_string()) return QuantizerSetting::parse(v.get<std::string>());
    check_keys(v, {"kind", "bits", "eta", "interval"}, where);
    if (!v.contains("kind") || get_string(v["kind"], where + ".kind") != "uniform")
        throw ConfigError(where + ": object quantizers must have \"kind\": \"uniform\"");
    if (!v.contains("bits")) throw ConfigError(where + ": missing \"bits\"");
    UniformQuantizerSpec u;
    u.base_bits = static_cast<unsigned>(get_count(v["bits"], where + ".bits"));
    if (v.contains("eta") && !v["eta"].is_null()) u.eta = get_number(v["eta"], where + ".eta");
    QuantizerSetting s;
    s.auto_interval = true;
    if (v.contains("interval")) {
        const json &iv = v["interval"];
        if (iv.is_string()) {
            if (iv.get<std::string>() != "auto") throw ConfigError(where + ".interval must be \"auto\" or [l, u]");
        } else if (iv.is_array() && iv.size() == 2) {
            u.lower = get_number(iv[0], where + ".interval[0]");
            u.upper = get_number(iv[1], where + ".interval[1]");
            s.auto_interval = false;
        } else {
            throw ConfigError(where + ".interval must be \"auto\" or [l, u]");
        }
    }
    if (s.auto_interval) {
        u.lower = -1.0;
        u.upper = 1.0;
    }
    u.validate();
    s.quantizer = u;
    return s;
}

std::optional<double> parse_alpha(const json &v, const std::string &what) {
    if (v.is_string()) {
        if (v.get<std::string>() != "auto") throw ConfigError(what + " must be a number or \"auto\"");
        return std::nullopt;
    }
    double a = get_number(v, what);
    if (!(a > 0.0)) throw ConfigError(what + " must be positive");
    return a;
}

void check_name(const std::string &name) {
    if (name.empty()) throw ConfigError("variant name must not be empty");
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                  c == '-' || c == '.' || c == '+';
        if (!ok) throw ConfigError("variant name '" + name + "' may only use letters, digits and _ - . +");
    }
}

VariantSpec make_variant(std::string name, const std::string &method, QuantizerSetting q,
                         std::optional<double> alpha) {
    VariantSpec v;
    v.name = std::move(name);
    v.method = MethodSpec::parse(method);
    v.method_text = method;
    v.quantizer = std::move(q);
    v.alpha = alpha;
    return v;
}

void log_line(const CommandOptions &opts, const std::string &line) {
    if (opts.log) *opts.log << line << '\n';
}

std::uint64_t effective_seed(const ExperimentSpec &spec, const CommandOptions &opts) {
    return opts.seed_override ? *opts.seed_override : spec.seed;
}

struct LoadedInstance {
    QuadraticProblem prob;
    MixingMatrix w;
};

MixingMatrix parse_mixing(const std::string &csv) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (auto tok : text_io::split(line, ',')) row.push_back(text_io::parse_double(tok));
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != n) throw ConfigError("mixing.csv is not square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    return MixingMatrix(std::move(m));
}

LoadedInstance load_instance(const ExperimentSpec &spec, const CommandOptions &opts) {
    const fs::path prob_path = opts.out / "problem.txt";
    const fs::path mix_path = opts.out / "mixing.csv";
    if (!fs::exists(prob_path) || !fs::exists(mix_path))
        throw ConfigError("no problem in " + opts.out.string() + " (run 'generate' first)");
    QuadraticProblem prob = QuadraticProblem::deserialize(text_io::read_file(prob_path));
    if (prob.nodes() != spec.n || prob.dim() != spec.p || prob.seed() != effective_seed(spec, opts))
        throw ConfigError(prob_path.string() + " does not match the experiment (run 'generate' again)");
    MixingMatrix w = parse_mixing(text_io::read_file(mix_path));
    if (w.size() != prob.nodes()) throw ConfigError("mixing.csv size does not match the problem");
    return {std::move(prob), std::move(w)};
}

std::vector<VariantSpec> select(const std::vector<VariantSpec> &all, const CommandOptions &opts) {
    if (!opts.variant) return all;
    for (const auto &v : all)
        if (v.name == *opts.variant) return {v};
    throw ConfigError("no variant named '" + *opts.variant + "'");
}

fs::path trace_path(const CommandOptions &opts, const std::string &name) { return opts.out / ("trace_" + name + ".csv"); }

struct RunOutcome {
    Trace trace;
    std::vector<std::string> messages;
    bool rejected = false;
};

RunOutcome run_variant(const ExperimentSpec &spec, const VariantSpec &variant, const LoadedInstance &inst,
                       const CommandOptions &opts, bool write_trace) {
    RunOutcome out;
    AlgorithmConfig cfg = make_config(spec, variant, inst.prob, inst.w);
    if (opts.strict) {
        TheoryConstants tc = compute_constants(inst.prob, inst.w, cfg.alpha, cfg.y0, cfg.quantizer);
        if (!tc.compliant) {
            out.rejected = true;
            out.messages.push_back(variant.name + ": alpha = " + text_io::format_double(cfg.alpha) +
                                   " violates alpha < 1/L and alpha <= c6 (limit " +
                                   text_io::format_double(step_limit(inst.prob)) + ")");
            return out;
        }
    }
    out.trace = run(cfg, inst.prob, inst.w);
    if (write_trace) text_io::write_file(trace_path(opts, variant.name), trace_to_csv(out.trace));
    for (const auto &w : out.trace.warnings) out.messages.push_back(variant.name + ": warning: " + w);
    if (out.trace.divergence) out.messages.push_back(variant.name + ": diverged: " + *out.trace.divergence);
    return out;
}

// Runs variants on `jobs` threads; outcomes keep the input order.
std::vector<RunOutcome> run_all(const ExperimentSpec &spec, const std::vector<VariantSpec> &variants,
                                const LoadedInstance &inst, const CommandOptions &opts, bool write_trace) {
    std::vector<RunOutcome> outcomes(variants.size());
    std::vector<std::exception_ptr> errors(variants.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < variants.size(); i = next++) {
            try {
                outcomes[i] = run_variant(spec, variants[i], inst, opts, write_trace);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(variants.size())));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto &t : pool) t.join();
    }
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    return outcomes;
}

int finish_runs(const std::vector<VariantSpec> &variants, const std::vector<RunOutcome> &outcomes,
                const CommandOptions &opts) {
    int code = exit_code::success;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        for (const auto &m : outcomes[i].messages) log_line(opts, m);
        if (outcomes[i].rejected) {
            code = std::max(code, exit_code::usage);
            continue;
        }
        if (outcomes[i].trace.divergence) code = exit_code::failure;
        log_line(opts, "wrote " + trace_path(opts, variants[i].name).string());
    }
    return code;
}

std::string pad(const std::string &s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

}    // namespace

QuantizerSetting QuantizerSetting::parse(std::string_view raw) {
    const std::string text = trim(raw);
    QuantizerSetting s;
    if (text == "identity" || text == "none") return s;
    if (auto args = inner_args(text, "Q("); !args.empty()) {
        DigitQuantizerSpec d;
        if (args.size() == 1 || (args.size() == 3 && args[1] == "-" && args[2] == "-")) {
            d = DigitQuantizerSpec::fixed(parse_unsigned(args[0], "Q digits"));
        } else if (args.size() == 3) {
            d.initial_digits = parse_unsigned(args[0], "Q initial digits");
            d.growth = parse_unsigned(args[1], "Q digit growth");
            d.period = parse_unsigned(args[2], "Q period");
        } else {
            throw ConfigError("quantizer '" + text + "': expected Q(a,-,-) or Q(a,b,c)");
        }
        d.validate();
        s.quantizer = d;
        return s;
    }
    if (auto args = inner_args(text, "uniform("); !args.empty()) {
        if (args.size() > 2) throw ConfigError("quantizer '" + text + "': expected uniform(b0) or uniform(b0,eta)");
        UniformQuantizerSpec u{-1.0, 1.0, parse_unsigned(args[0], "uniform bits"), std::nullopt};
        if (args.size() == 2) u.eta = text_io::parse_double(args[1]);
        u.validate();
        s.quantizer = u;
        s.auto_interval = true;
        return s;
    }
    throw ConfigError("unknown quantizer '" + text + "'");
}

std::string QuantizerSetting::to_string() const {
    if (auto *u = std::get_if<UniformQuantizerSpec>(&quantizer); u && auto_interval) {
        std::string s = "uniform(" + std::to_string(u->base_bits);
        if (u->eta) s += "," + text_io::format_double(*u->eta);
        return s + ")";
    }
    return describe(quantizer);
}

ExperimentSpec ExperimentSpec::parse(const std::string &json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("experiment file is not valid JSON: ") + e.what());
    }
    check_keys(root, {"version", "problem", "topology", "max_iter", "initial_point", "message_model",
                      "full_precision_digits", "alpha_auto_factor", "cost", "variants", "sweep"},
               "experiment");
    if (!root.contains("version") || get_count(root["version"], "version") != 1)
        throw ConfigError("experiment file must declare \"version\": 1");

    ExperimentSpec spec;
    if (!root.contains("problem")) throw ConfigError("missing \"problem\" section");
    const json &pr = root["problem"];
    check_keys(pr, {"n", "p", "kappa", "seed"}, "problem");
    if (pr.contains("n")) spec.n = get_count(pr["n"], "problem.n");
    if (pr.contains("p")) spec.p = get_count(pr["p"], "problem.p");
    if (pr.contains("kappa")) spec.kappa = get_number(pr["kappa"], "problem.kappa");
    if (pr.contains("seed")) spec.seed = get_count(pr["seed"], "problem.seed");
    if (spec.n < 2) throw ConfigError("problem.n must be >= 2");
    if (spec.p < 1) throw ConfigError("problem.p must be >= 1");
    if (!(spec.kappa >= 1.0)) throw ConfigError("problem.kappa must be >= 1");

    if (root.contains("topology")) spec.topology = TopologySpec::parse(get_string(root["topology"], "topology"));
    if (root.contains("max_iter")) spec.max_iter = get_count(root["max_iter"], "max_iter");
    if (root.contains("initial_point")) spec.initial_point = get_number(root["initial_point"], "initial_point");
    if (root.contains("message_model")) {
        std::string m = get_string(root["message_model"], "message_model");
        if (m == "directed_edges")
            spec.message_model = MessageModel::directed_edges;
        else if (m == "node_broadcast")
            spec.message_model = MessageModel::node_broadcast;
        else
            throw ConfigError("message_model must be \"directed_edges\" or \"node_broadcast\"");
    }
    if (root.contains("full_precision_digits")) {
        spec.full_precision_digits =
            static_cast<unsigned>(get_count(root["full_precision_digits"], "full_precision_digits"));
        if (spec.full_precision_digits < 1) throw ConfigError("full_precision_digits must be >= 1");
    }
    if (root.contains("alpha_auto_factor")) {
        spec.alpha_auto_factor = get_number(root["alpha_auto_factor"], "alpha_auto_factor");
        if (!(spec.alpha_auto_factor > 0.0)) throw ConfigError("alpha_auto_factor must be positive");
    }
    if (root.contains("cost")) {
        const json &c = root["cost"];
        check_keys(c, {"c_g", "c_c"}, "cost");
        if (c.contains("c_g")) spec.c_g = get_number(c["c_g"], "cost.c_g");
        if (c.contains("c_c")) {
            spec.c_c.clear();
            const json &cc = c["c_c"];
            if (cc.is_array()) {
                for (const auto &x : cc) spec.c_c.push_back(get_number(x, "cost.c_c[]"));
            } else {
                spec.c_c.push_back(get_number(cc, "cost.c_c"));
            }
        }
        for (double x : spec.c_c) CostModel{x, spec.c_g}.validate();
        CostModel{0.0, spec.c_g}.validate();
    }

    if (root.contains("variants")) {
        const json &vs = root["variants"];
        if (!vs.is_array()) throw ConfigError("variants must be an array");
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const std::string where = "variants[" + std::to_string(i) + "]";
            const json &v = vs[i];
            check_keys(v, {"name", "method", "quantizer", "alpha"}, where);
            if (!v.contains("name") || !v.contains("method"))
                throw ConfigError(where + " needs \"name\" and \"method\"");
            QuantizerSetting q;
            if (v.contains("quantizer")) q = parse_quantizer(v["quantizer"], where + ".quantizer");
            std::optional<double> alpha;
            if (v.contains("alpha")) alpha = parse_alpha(v["alpha"], where + ".alpha");
            spec.variants.push_back(make_variant(get_string(v["name"], where + ".name"),
                                                 get_string(v["method"], where + ".method"), q, alpha));
        }
    }

    if (root.contains("sweep")) {
        const json &sw = root["sweep"];
        check_keys(sw, {"methods", "quantizers", "alphas"}, "sweep");
        if (!sw.contains("methods") || !sw["methods"].is_array() || sw["methods"].empty())
            throw ConfigError("sweep.methods must be a non-empty array");
        std::vector<std::string> methods;
        for (const auto &m : sw["methods"]) methods.push_back(get_string(m, "sweep.methods[]"));
        std::vector<QuantizerSetting> quants{QuantizerSetting{}};
        if (sw.contains("quantizers")) {
            if (!sw["quantizers"].is_array() || sw["quantizers"].empty())
                throw ConfigError("sweep.quantizers must be a non-empty array");
            quants.clear();
            for (const auto &q : sw["quantizers"]) quants.push_back(parse_quantizer(q, "sweep.quantizers[]"));
        }
        std::vector<std::optional<double>> alphas{std::nullopt};
        if (sw.contains("alphas")) {
            if (!sw["alphas"].is_array() || sw["alphas"].empty())
                throw ConfigError("sweep.alphas must be a non-empty array");
            alphas.clear();
            for (const auto &a : sw["alphas"]) alphas.push_back(parse_alpha(a, "sweep.alphas[]"));
        }
        for (std::size_t mi = 0; mi < methods.size(); ++mi)
            for (std::size_t qi = 0; qi < quants.size(); ++qi)
                for (std::size_t ai = 0; ai < alphas.size(); ++ai)
                    spec.sweep.push_back(make_variant("sweep-" + std::to_string(mi) + "-" + std::to_string(qi) +
                                                          "-" + std::to_string(ai),
                                                      methods[mi], quants[qi], alphas[ai]));
    }

    std::set<std::string> names;
    for (const auto &v : spec.all_variants()) {
        check_name(v.name);
        if (!names.insert(v.name).second) throw ConfigError("duplicate variant name '" + v.name + "'");
    }
    return spec;
}

ExperimentSpec ExperimentSpec::load(const fs::path &path) {
    if (!fs::exists(path)) throw ConfigError("experiment file not found: " + path.string());
    return parse(text_io::read_file(path));
}

std::vector<VariantSpec> ExperimentSpec::all_variants() const {
    std::vector<VariantSpec> all = variants;
    all.insert(all.end(), sweep.begin(), sweep.end());
    return all;
}

AlgorithmConfig make_config(const ExperimentSpec &spec, const VariantSpec &variant, const QuadraticProblem &prob,
                            const MixingMatrix &w) {
    AlgorithmConfig cfg;
    cfg.alpha = variant.alpha ? *variant.alpha : spec.alpha_auto_factor * step_limit(prob);
    cfg.schedule = variant.method.schedule;
    cfg.grad_steps = variant.method.grad_steps;
    cfg.max_iter = spec.max_iter;
    cfg.y0.assign(prob.nodes() * prob.dim(), spec.initial_point);
    cfg.message_model = spec.message_model;
    cfg.quantizer = variant.quantizer.quantizer;
    if (auto *id = std::get_if<IdentityQuantizer>(&cfg.quantizer)) id->full_precision_digits = spec.full_precision_digits;
    if (auto *u = std::get_if<UniformQuantizerSpec>(&cfg.quantizer); u && variant.quantizer.auto_interval)
        cfg.quantizer = auto_sized_quantizer(prob, w, cfg.alpha, cfg.y0, u->base_bits, u->eta, cfg.schedule,
                                             cfg.max_iter);
    return cfg;
}

int cmd_generate(const ExperimentSpec &spec, const CommandOptions &opts) {
    const std::uint64_t seed = effective_seed(spec, opts);
    QuadraticProblem prob = generate_quadratic(spec.n, spec.p, spec.kappa, seed);
    Graph g = build_topology(spec.topology, spec.n);
    MixingMatrix w = metropolis_weights(g);

    std::error_code ec;
    fs::create_directories(opts.out, ec);
    if (ec) throw ConfigError("cannot create " + opts.out.string() + ": " + ec.message());
    text_io::write_file(opts.out / "problem.txt", prob.serialize());
    text_io::write_file(opts.out / "mixing.csv", w.to_csv());
    text_io::write_file(opts.out / "edges.txt", g.to_edge_list());

    std::ostringstream s;
    s << "n " << spec.n << '\n'
      << "p " << spec.p << '\n'
      << "kappa " << text_io::format_double(spec.kappa) << '\n'
      << "seed " << seed << '\n'
      << "topology " << spec.topology.to_string() << '\n'
      << "edges " << g.edges().size() << '\n'
      << "beta " << text_io::format_double(w.beta()) << '\n'
      << "global_condition " << text_io::format_double(prob.global_condition()) << '\n'
      << "L " << text_io::format_double(prob.max_lipschitz()) << '\n'
      << "mu_fbar " << text_io::format_double(prob.mu_fbar()) << '\n'
      << "L_fbar " << text_io::format_double(prob.l_fbar()) << '\n'
      << "step_limit " << text_io::format_double(step_limit(prob)) << '\n';
    text_io::write_file(opts.out / "summary.txt", s.str());
    log_line(opts, "beta = " + text_io::format_double(w.beta()) +
                       ", global condition number = " + text_io::format_double(prob.global_condition()));
    return exit_code::success;
}

int cmd_run(const ExperimentSpec &spec, const CommandOptions &opts) {
    const LoadedInstance inst = load_instance(spec, opts);
    std::vector<VariantSpec> variants = opts.variant ? select(spec.all_variants(), opts) : spec.variants;
    CommandOptions sequential = opts;
    sequential.jobs = 1;
    return finish_runs(variants, run_all(spec, variants, inst, sequential, true), opts);
}

int cmd_sweep(const ExperimentSpec &spec, const CommandOptions &opts) {
    const LoadedInstance inst = load_instance(spec, opts);
    std::vector<VariantSpec> variants = select(spec.all_variants(), opts);
    return finish_runs(variants, run_all(spec, variants, inst, opts, true), opts);
}

int cmd_verify_bounds(const ExperimentSpec &spec, const CommandOptions &opts) {
    const LoadedInstance inst = load_instance(spec, opts);
    std::vector<VariantSpec> variants = select(spec.all_variants(), opts);
    std::vector<RunOutcome> outcomes = run_all(spec, variants, inst, opts, false);
    int code = exit_code::success;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        const RunOutcome &o = outcomes[i];
        for (const auto &m : o.messages) log_line(opts, m);
        if (o.rejected) {
            code = std::max(code, exit_code::usage);
            continue;
        }
        if (o.trace.divergence) {
            log_line(opts, "FAIL " + variants[i].name + " divergence_guard");
            code = exit_code::failure;
        }
        for (const BoundCheck &b : verify_bounds(o.trace)) {
            std::string status = !b.applicable ? "N/A " : (b.violations == 0 ? "PASS" : "FAIL");
            std::string line = status + " " + variants[i].name + " " + b.name;
            if (b.applicable)
                line += " checked=" + std::to_string(b.checked) + " violations=" + std::to_string(b.violations) +
                        " worst_ratio=" + text_io::format_double(b.worst_ratio);
            log_line(opts, line);
            if (b.applicable && b.violations > 0) code = exit_code::failure;
        }
    }
    return code;
}

const std::vector<double> &TraceTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return columns[i];
    throw ConfigError("trace is missing column '" + std::string(name) + "'");
}

TraceTable TraceTable::parse(const std::string &csv) {
    TraceTable t;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trace is empty (no header)");
    for (auto h : text_io::split(line, ',')) t.header.push_back(trim(h));
    t.columns.resize(t.header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = text_io::split(line, ',');
        if (cells.size() != t.header.size())
            throw ConfigError("trace line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                              " fields, expected " + std::to_string(t.header.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) t.columns[i].push_back(text_io::parse_double(cells[i]));
    }
    return t;
}

int cmd_report(const ExperimentSpec &spec, const CommandOptions &opts) {
    constexpr double target = 1e-6;
    std::vector<VariantSpec> variants = select(spec.all_variants(), opts);
    const fs::path dir = opts.out / "report";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::string> head{"variant", "method", "quantizer", "iterations", "final_rel_err",
                                  "k@1e-6", "digits@1e-6"};
    for (double cc : spec.c_c) head.push_back("cost@1e-6[c_c=" + text_io::format_double(cc) + "]");
    std::vector<std::vector<std::string>> table{head};

    for (const auto &v : variants) {
        const fs::path path = trace_path(opts, v.name);
        if (!fs::exists(path)) {
            // Sweep-product traces exist only after `sweep`.
            bool explicit_variant = false;
            for (const auto &e : spec.variants) explicit_variant = explicit_variant || e.name == v.name;
            if (!explicit_variant && !opts.variant) continue;
            throw ConfigError("missing trace " + path.string() + " (run it first)");
        }
        TraceTable t = TraceTable::parse(text_io::read_file(path));
        const auto &k = t.column("k");
        const auto &err = t.column("rel_err_mean");
        const auto &digits = t.column("digits_cum");
        const auto &grads = t.column("grad_evals_cum");

        auto series = [&](const std::string &xname, auto abscissa) {
            std::string s = xname + ",rel_err_mean\n";
            for (std::size_t r = 0; r < t.rows(); ++r)
                s += text_io::format_double(abscissa(r)) + "," + text_io::format_double(err[r]) + "\n";
            return s;
        };
        text_io::write_file(dir / (v.name + "_vs_iterations.csv"), series("k", [&](std::size_t r) { return k[r]; }));
        text_io::write_file(dir / (v.name + "_vs_digits.csv"),
                            series("digits_cum", [&](std::size_t r) { return digits[r]; }));
        for (double cc : spec.c_c) {
            CostModel model{cc, spec.c_g};
            auto cost_at = [&](std::size_t r) {
                return cost(static_cast<std::uint64_t>(digits[r]), static_cast<std::uint64_t>(grads[r]), model);
            };
            text_io::write_file(dir / (v.name + "_vs_cost_cc=" + text_io::format_double(cc) + ".csv"),
                                series("cost", cost_at));
        }

        std::vector<std::string> row{v.name, v.method_text, v.quantizer.to_string(), std::to_string(t.rows())};
        row.push_back(t.rows() ? text_io::format_double(err.back()) : "-");
        std::optional<std::size_t> hit;
        for (std::size_t r = 0; r < t.rows() && !hit; ++r)
            if (err[r] <= target) hit = r;
        if (hit) {
            row.push_back(text_io::format_double(k[*hit]));
            row.push_back(text_io::format_double(digits[*hit]));
            for (double cc : spec.c_c)
                row.push_back(text_io::format_double(cost(static_cast<std::uint64_t>(digits[*hit]),
                                                          static_cast<std::uint64_t>(grads[*hit]),
                                                          CostModel{cc, spec.c_g})));
        } else {
            row.insert(row.end(), 2 + spec.c_c.size(), "-");
        }
        table.push_back(std::move(row));
    }

    std::vector<std::size_t> width(head.size(), 0);
    for (const auto &row : table)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::string summary;
    for (const auto &row : table) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) line += (c ? "  " : "") + pad(row[c], width[c]);
        line.erase(line.find_last_not_of(' ') + 1);
        summary += line + "\n";
    }
    text_io::write_file(dir / "summary.txt", summary);
    if (opts.log) *opts.log << summary;
    return exit_code::success;
}

}    // namespace nearq
