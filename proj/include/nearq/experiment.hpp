#pragma once

#include "nearq/algorithm.hpp"
#include "nearq/metrics.hpp"
#include "nearq/problem.hpp"
#include "nearq/quantization.hpp"
#include "nearq/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nearq {

/// Quantizer as written in an experiment file. A uniform quantizer may leave its
/// interval to be sized from the bounded-iterate radius at run time.
struct QuantizerSetting {
    Quantizer quantizer = IdentityQuantizer{};
    bool auto_interval = false;

    /// "identity", "Q(a,-,-)", "Q(a,b,c)", "uniform(b0)", "uniform(b0,eta)".
    static QuantizerSetting parse(std::string_view text);
    std::string to_string() const;
};

struct VariantSpec {
    std::string name;
    MethodSpec method;
    std::string method_text;
    QuantizerSetting quantizer;
    std::optional<double> alpha;    // nullopt: auto = alpha_auto_factor * min{1/L, c6}
};

/// Experiment description (JSON, "version": 1). Unknown keys are rejected.
///
///   {
///     "version": 1,
///     "problem": {"n": 10, "p": 10, "kappa": 2, "seed": 1},
///     "topology": "k_cyclic(4)",
///     "max_iter": 300,
///     "initial_point": 0,
///     "message_model": "directed_edges" | "node_broadcast",
///     "full_precision_digits": 16,
///     "alpha_auto_factor": 0.95,
///     "cost": {"c_g": 1, "c_c": [1e-4, 1e4]},
///     "variants": [{"name": "...", "method": "NEAR-DGD+(1,1,k)", "quantizer": "Q(2,1,10)", "alpha": "auto"}],
///     "sweep": {"methods": [...], "quantizers": [...], "alphas": [...]}
///   }
struct ExperimentSpec {
    std::size_t n = 10;
    std::size_t p = 10;
    double kappa = 2.0;
    std::uint64_t seed = 0;
    TopologySpec topology{TopologyKind::k_cyclic, 4};
    std::size_t max_iter = 300;
    double initial_point = 0.0;
    MessageModel message_model = MessageModel::directed_edges;
    unsigned full_precision_digits = 16;
    double alpha_auto_factor = 0.95;
    double c_g = 1.0;
    std::vector<double> c_c{1e-4, 1e4};
    std::vector<VariantSpec> variants;
    std::vector<VariantSpec> sweep;    // cartesian product, already expanded

    static ExperimentSpec parse(const std::string &json_text);
    static ExperimentSpec load(const std::filesystem::path &path);

    /// Explicit variants followed by the expanded sweep.
    std::vector<VariantSpec> all_variants() const;
};

struct CommandOptions {
    std::filesystem::path out = ".";
    std::optional<std::string> variant;
    bool strict = false;
    unsigned jobs = 1;
    std::optional<std::uint64_t> seed_override;
    std::ostream *log = nullptr;    // progress / diagnostics; may be null
};

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int usage = 1;
inline constexpr int failure = 2;    // divergence or bound violation
}    // namespace exit_code

/// Builds the run configuration for one variant (resolves auto alpha and auto interval).
AlgorithmConfig make_config(const ExperimentSpec &spec, const VariantSpec &variant, const QuadraticProblem &prob,
                            const MixingMatrix &w);

/// problem.txt, mixing.csv, edges.txt and summary.txt under `out`.
int cmd_generate(const ExperimentSpec &spec, const CommandOptions &opts);
/// trace_<variant>.csv for the selected (or every explicit) variant.
int cmd_run(const ExperimentSpec &spec, const CommandOptions &opts);
/// Every variant including the sweep product, `jobs` at a time.
int cmd_sweep(const ExperimentSpec &spec, const CommandOptions &opts);
/// Runs each variant and checks the applicable theoretical bounds; one line per check.
int cmd_verify_bounds(const ExperimentSpec &spec, const CommandOptions &opts);
/// report/<variant>_vs_{iterations,digits,cost_cc=<c>}.csv and report/summary.txt.
int cmd_report(const ExperimentSpec &spec, const CommandOptions &opts);

/// Columns of a trace CSV by header name.
struct TraceTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double> &column(std::string_view name) const;
    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    static TraceTable parse(const std::string &csv);
};

}    // namespace nearq
