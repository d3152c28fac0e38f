// nearq: generate problems, run and sweep NEAR-DGD+Q variants, check the
// theoretical bounds and emit plot-ready reports.

#include "nearq/error.hpp"
#include "nearq/experiment.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

int main(int argc, char **argv) {
    CLI::App app{"Simulator for nested distributed gradient descent with quantized communication"};
    app.require_subcommand(1);

    std::string spec_path;
    nearq::CommandOptions opts;
    opts.log = &std::cout;
    std::string out_dir = ".";
    std::string variant;
    std::uint64_t seed_override = 0;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--spec", spec_path, "experiment file (JSON, version 1)")->required();
        sub->add_option("--out", out_dir, "working directory for problem, traces and report");
        sub->add_option("--seed-override", seed_override, "replace the problem seed");
    };

    CLI::App *gen = app.add_subcommand("generate", "write problem.txt, mixing.csv, edges.txt and summary.txt");
    CLI::App *run = app.add_subcommand("run", "run the listed variants (or --variant) and write traces");
    CLI::App *sweep = app.add_subcommand("sweep", "run every variant including the sweep product");
    CLI::App *verify = app.add_subcommand("verify-bounds", "check traces against the theoretical bounds");
    CLI::App *report = app.add_subcommand("report", "write error series and the summary table");
    for (CLI::App *sub : {gen, run, sweep, verify, report}) add_common(sub);
    for (CLI::App *sub : {run, sweep, verify, report})
        sub->add_option("--variant", variant, "restrict to one variant");
    for (CLI::App *sub : {run, sweep, verify})
        sub->add_flag("--strict", opts.strict, "reject step sizes outside alpha < 1/L, alpha <= c6");
    for (CLI::App *sub : {sweep, verify})
        sub->add_option("--jobs", opts.jobs, "concurrent runs")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : nearq::exit_code::usage;
    }

    try {
        const nearq::ExperimentSpec spec = nearq::ExperimentSpec::load(spec_path);
        opts.out = out_dir;
        if (!variant.empty()) opts.variant = variant;
        for (CLI::App *sub : {gen, run, sweep, verify, report})
            if (sub->count("--seed-override")) opts.seed_override = seed_override;

        if (gen->parsed()) return nearq::cmd_generate(spec, opts);
        if (run->parsed()) return nearq::cmd_run(spec, opts);
        if (sweep->parsed()) return nearq::cmd_sweep(spec, opts);
        if (verify->parsed()) return nearq::cmd_verify_bounds(spec, opts);
        return nearq::cmd_report(spec, opts);
    } catch (const nearq::ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return nearq::exit_code::usage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return nearq::exit_code::failure;
    }
}
