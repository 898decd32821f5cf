#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mesbm/io.hpp"
#include "mesbm/numeric.hpp"
#include "mesbm/pipeline.hpp"
#include "mesbm/simulator.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct SimulateArgs {
    std::string example;
    std::string scenario_path;
    long num_subjects = 600;
    std::uint64_t seed = 1;
    std::string out_dir;
};

struct FitArgs {
    std::string data_dir;
    int intervals = 10;
    std::string partition = "equal-length";
    std::string shape = "auto";
    int quad_points = 5;
    int max_iters = 200;
    bool strict = false;
    std::string out_path;
};

struct EvalArgs {
    std::string fit_path;
    std::string truth_path;
    std::string scale = "probability";
};

struct ExportArgs {
    std::string fit_path;
    int grid = 101;
    std::string out_path;
};

int run_simulate(const SimulateArgs& args) {
    mesbm::Scenario scenario;
    if (!args.scenario_path.empty()) {
        scenario = mesbm::load_truth(args.scenario_path);
        scenario.num_subjects = args.num_subjects;
        scenario.seed = args.seed;
    } else {
        scenario = mesbm::example_scenario(args.example, args.num_subjects, args.seed);
    }
    mesbm::validate_scenario(scenario);
    const mesbm::GeneratedDataset data = mesbm::generate(scenario);
    mesbm::write_dataset(data, args.out_dir);
    std::cerr << "wrote " << data.subjects.size() << " subjects to " << args.out_dir << "\n";
    return 0;
}

int run_fit(const FitArgs& args) {
    const auto start = std::chrono::steady_clock::now();

    const mesbm::Dataset data = mesbm::load_dataset(args.data_dir);
    mesbm::FitConfig config;
    config.S = args.intervals;
    config.partition = mesbm::parse_partition_mode(args.partition);
    config.quad_points = args.quad_points;
    config.max_outer_iters = args.max_iters;
    const mesbm::ShapeKind shape = mesbm::parse_shape_kind(args.shape);

    mesbm::FitResult fit = mesbm::fit_pipeline(data.subjects, data.assignment, config, shape);
    fit.time_normalized = data.time_normalized;
    fit.time_min = data.time_min;
    fit.time_max = data.time_max;

    for (const std::string& warning : fit.partition.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    if (data.time_normalized) {
        std::cerr << "note: subject times rescaled from [" << format_double(data.time_min)
                  << ", " << format_double(data.time_max) << "] to [0, 1]\n";
    }
    if (!fit.converged) {
        if (args.strict) {
            throw mesbm::NumericalError("fit did not converge within " +
                                        std::to_string(config.max_outer_iters) + " sweeps");
        }
        std::cerr << "warning: fit did not converge within "
                  << config.max_outer_iters << " sweeps\n";
    }

    mesbm::write_fit(fit, args.out_path);

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::cerr << "fit: " << fit.iterations << " sweeps, " << elapsed.count() << " s, wrote "
              << args.out_path << "\n";
    return 0;
}

int run_eval(const EvalArgs& args) {
    const mesbm::FitResult fit = mesbm::load_fit(args.fit_path);
    const mesbm::Scenario truth = mesbm::load_truth(args.truth_path);
    const mesbm::ErrorScale scale = mesbm::parse_error_scale(args.scale);

    if (truth.K != fit.K) {
        throw mesbm::DataError("truth has " + std::to_string(truth.K) +
                               " communities but the fit has " + std::to_string(fit.K));
    }

    std::cout << "block,stage,scale,relative_error\n";
    for (const mesbm::BlockFit& block : fit.blocks) {
        int p = -1;
        for (int q = 0; q < mesbm::pair_count(truth.K); ++q) {
            if (mesbm::pair_label(q, truth.K) == block.label) p = q;
        }
        if (p < 0) {
            throw mesbm::DataError("fit block '" + block.label +
                                   "' has no counterpart in the truth");
        }
        const mesbm::Curve& truth_curve = truth.block_probability[static_cast<size_t>(p)];
        const auto emit = [&](const char* stage, const Eigen::VectorXd& levels) {
            const mesbm::StepFunction estimate{fit.partition.boundaries, levels};
            const double error = mesbm::relative_error(estimate, truth_curve, scale);
            std::cout << block.label << ',' << stage << ',' << mesbm::error_scale_name(scale)
                      << ',' << format_double(error) << "\n";
        };
        emit("unconstrained", block.unconstrained);
        emit("shape", block.shaped);
        emit("fused", block.fused);
    }
    return 0;
}

int run_export(const ExportArgs& args) {
    const mesbm::FitResult fit = mesbm::load_fit(args.fit_path);

    std::string csv = "t,block,stage,theta,probability\n";
    for (const mesbm::BlockFit& block : fit.blocks) {
        const auto emit = [&](const char* stage, const Eigen::VectorXd& levels) {
            const mesbm::StepFunction curve{fit.partition.boundaries, levels};
            for (int g = 0; g < args.grid; ++g) {
                const double t = static_cast<double>(g) / (args.grid - 1);
                const double theta = curve(t);
                csv += format_double(t);
                csv += ',';
                csv += block.label;
                csv += ',';
                csv += stage;
                csv += ',';
                csv += format_double(theta);
                csv += ',';
                csv += format_double(mesbm::logistic(theta));
                csv += '\n';
            }
        };
        emit("unconstrained", block.unconstrained);
        emit("shape", block.shaped);
        emit("fused", block.fused);
    }
    mesbm::write_file_atomic(args.out_path, csv);
    std::cerr << "wrote " << args.out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-effect time-varying stochastic blockmodel estimation"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
    CLI::Option* opt_example =
        simulate->add_option("--example", sim.example, "Built-in design: A, B or C")
            ->check(CLI::IsMember({"A", "B", "C"}));
    CLI::Option* opt_scenario =
        simulate->add_option("--scenario", sim.scenario_path, "Custom truth JSON file")
            ->check(CLI::ExistingFile);
    opt_example->excludes(opt_scenario);
    opt_scenario->excludes(opt_example);
    simulate->add_option("--n-subjects", sim.num_subjects, "Number of subjects")
        ->capture_default_str();
    simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();

    FitArgs fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Run the three-step estimator");
    fit_cmd->add_option("data_dir", fit.data_dir, "Dataset directory")->required();
    fit_cmd->add_option("--intervals", fit.intervals, "Number of time intervals S")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_option("--partition", fit.partition, "Interval construction")
        ->check(CLI::IsMember({"equal-length", "equal-count"}))
        ->capture_default_str();
    fit_cmd
        ->add_option("--shape", fit.shape,
                     "Shape constraint: auto, increasing, decreasing, unimodal, "
                     "inverse-unimodal")
        ->check(CLI::IsMember(
            {"auto", "increasing", "decreasing", "unimodal", "inverse-unimodal"}))
        ->capture_default_str();
    fit_cmd->add_option("--quad-points", fit.quad_points, "Gauss-Hermite points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_option("--max-iters", fit.max_iters, "Outer sweep limit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_flag("--strict", fit.strict, "Treat non-convergence as failure");
    fit_cmd->add_option("--out", fit.out_path, "Fit artifact path")->required();

    EvalArgs eval;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "Relative error of a fit against a truth file");
    eval_cmd->add_option("--fit", eval.fit_path, "Fit artifact")->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--truth", eval.truth_path, "Truth file")->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--scale", eval.scale, "Error scale")
        ->check(CLI::IsMember({"probability", "logit"}))
        ->capture_default_str();

    ExportArgs exp;
    CLI::App* export_cmd =
        app.add_subcommand("export-curves", "Sample fitted curves on a uniform grid");
    export_cmd->add_option("--fit", exp.fit_path, "Fit artifact")->required()
        ->check(CLI::ExistingFile);
    export_cmd->add_option("--grid", exp.grid, "Grid points (at least 2)")
        ->check(CLI::Range(2, 1000000))
        ->capture_default_str();
    export_cmd->add_option("--out", exp.out_path, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (simulate->parsed()) {
            if (sim.example.empty() && sim.scenario_path.empty()) {
                std::cerr << "error: one of --example or --scenario is required\n";
                return kExitUsage;
            }
            return run_simulate(sim);
        }
        if (fit_cmd->parsed()) return run_fit(fit);
        if (eval_cmd->parsed()) return run_eval(eval);
        if (export_cmd->parsed()) return run_export(exp);
    } catch (const mesbm::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const mesbm::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
