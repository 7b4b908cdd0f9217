// cpfit: generate CP test tensors, run the solvers, sweep benchmarks, and
// emit trace/plot data.
//
// Subcommands: gen-dense, gen-laplacian, solve, bench, plot.
// Exit codes: 0 success, 1 usage, 2 numerical failure, 3 I/O failure.

#include "cpfit/als.hpp"
#include "cpfit/bench.hpp"
#include "cpfit/errors.hpp"
#include "cpfit/io.hpp"
#include "cpfit/ncg.hpp"
#include "cpfit/ngmres.hpp"
#include "cpfit/problems.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace cpfit;

// Scalar options take the last occurrence so a flat key=value config file
// (expanded just after the subcommand) is overridden by explicit flags.
template <typename OptionPtr>
OptionPtr overridable(OptionPtr opt) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    return opt;
}

struct ProblemFlags {
    // dense spec
    index_t s = 20;
    double c = 0.5;
    index_t noise_free_rank = 3;
    double l1 = 0.0;
    double l2 = 0.0;
    // laplacian spec
    std::optional<int> d;
    // file input
    std::string tensor_path;
    bool densify = false;

    void attach(CLI::App* cmd, bool with_file) {
        overridable(cmd->add_option("--s", s, "mode size (dense: s x s x s; laplacian: grid points)"));
        overridable(cmd->add_option("--c", c, "factor collinearity in [0,1)")
                        ->check(CLI::Range(0.0, 0.9999)));
        overridable(cmd->add_option("--R", noise_free_rank, "noise-free rank of the generated tensor"));
        overridable(cmd->add_option("--l1", l1, "first-stage noise level in [0,100)"));
        overridable(cmd->add_option("--l2", l2, "second-stage noise level in [0,100)"));
        overridable(cmd->add_option("--d", d, "grid dimension; selects the sparse Laplacian problem"));
        if (with_file) {
            overridable(cmd->add_option("--tensor", tensor_path, "read the data tensor from a tns file"));
            cmd->add_flag("--densify", densify, "convert a tensor read from file to full storage");
        }
    }

    DataTensor build(std::uint64_t seed) const {
        if (!tensor_path.empty()) {
            if (densify) return DataTensor(read_tns_dense_file(tensor_path));
            return DataTensor(read_tns_file(tensor_path));
        }
        if (d) return DataTensor(laplacian_tensor({*d, s}));
        return DataTensor(dense_test_problem({s, c, noise_free_rank, l1, l2, seed}).data);
    }
};

struct SolverFlags {
    std::string method = "ngmres";
    index_t rank = 0; // 0: default to the problem's noise-free rank
    int window = 20;
    double tol_grad = 1e-9;
    int max_iters = 2000;
    double epsilon_reg = 1e-12;

    void attach(CLI::App* cmd) {
        overridable(cmd->add_option("--method", method, "solver: als, ngmres or ncg")
                        ->check(CLI::IsMember({"als", "ngmres", "ncg"})));
        overridable(cmd->add_option("--rank", rank, "CP model rank (defaults to --R)"));
        overridable(cmd->add_option("--window", window, "N-GMRES window size")
                        ->check(CLI::PositiveNumber));
        overridable(cmd->add_option("--tol-grad", tol_grad, "stop when ||g||/||T|| <= this"));
        overridable(cmd->add_option("--max-iters", max_iters, "iteration budget"));
        overridable(cmd->add_option("--epsilon-reg", epsilon_reg, "normal-equation ridge scale"));
    }

    SolverSettings settings(index_t fallback_rank) const {
        SolverSettings out;
        out.method = *parse_method(method);
        out.rank = rank > 0 ? rank : fallback_rank;
        out.window = window;
        out.tol_grad = tol_grad;
        out.max_iters = max_iters;
        out.epsilon_reg = epsilon_reg;
        return out;
    }
};

int cmd_gen_dense(const ProblemFlags& problem, std::uint64_t seed, const std::string& out,
                  const std::string& true_out, const std::string& noise_free_out) {
    const DenseProblem generated =
        dense_test_problem({problem.s, problem.c, problem.noise_free_rank, problem.l1, problem.l2,
                            seed});
    write_tns_file(generated.data, out);
    if (!true_out.empty()) write_ktensor_file(generated.truth, true_out);
    if (!noise_free_out.empty()) write_tns_file(generated.noise_free, noise_free_out);
    std::cout << "wrote " << out << " (" << generated.data.shape().num_elements()
              << " entries, ||T||_F = " << format_double(frobenius_norm(generated.data)) << ")\n";
    return 0;
}

int cmd_gen_laplacian(int d, index_t s, const std::string& out) {
    const SparseTensor t = laplacian_tensor({d, s});
    write_tns_file(t, out);
    std::cout << "wrote " << out << " (order " << t.shape().order() << ", nnz " << t.nnz()
              << ")\n";
    return 0;
}

int cmd_solve(const ProblemFlags& problem, const SolverFlags& solver, std::uint64_t seed,
              const std::string& out, const std::string& trace_path, bool zero_time) {
    const DataTensor t = problem.build(seed);
    const SolverSettings settings = solver.settings(problem.noise_free_rank);
    RunOutcome outcome = run_solver(t, settings, seed);

    if (zero_time) outcome.trace.zero_times();
    if (!trace_path.empty()) write_trace_csv(outcome.trace, trace_path);
    if (!out.empty()) write_ktensor_file(outcome.solution, out);

    const TraceRecord& last = outcome.trace.records.back();
    std::cout << "method=" << to_string(settings.method) << " iters=" << last.iter
              << " f=" << format_double(last.f) << " h=" << format_double(outcome.h_star)
              << " gnorm_rel=" << format_double(last.gnorm_rel)
              << " stop=" << to_string(outcome.stop_reason) << "\n";
    return 0;
}

int cmd_bench(const ProblemFlags& problem, const SolverFlags& solver,
              const std::vector<std::string>& methods, const std::vector<int>& windows, int seeds,
              std::uint64_t first_seed, int workers, const std::string& out) {
    BenchConfig config;
    for (const std::string& name : methods) {
        const auto method = parse_method(name);
        if (!method) throw CLI::ValidationError("--methods", "unknown method " + name);
        if (*method == Method::Ngmres) {
            for (int w : windows) config.cells.push_back({Method::Ngmres, w});
        } else {
            config.cells.push_back({*method, solver.window});
        }
    }
    config.seeds = seeds;
    config.first_seed = first_seed;
    config.workers = workers;
    config.base = solver.settings(problem.noise_free_rank);

    const BenchReport report =
        run_bench([&](std::uint64_t seed) { return problem.build(seed); }, config);

    if (out.empty()) {
        write_report_csv(report, std::cout);
    } else {
        std::ofstream os(out);
        if (!os) throw io_error("cannot open '" + out + "' for writing");
        write_report_csv(report, os);
        std::cout << "wrote " << out << " (" << report.runs.size() << " runs)\n";
    }
    return 0;
}

int cmd_plot(const std::vector<std::string>& traces, const std::vector<std::string>& labels,
             std::vector<double> hstars, const std::string& out, const std::string& svg) {
    std::vector<PlotSeriesInput> inputs;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        PlotSeriesInput in;
        in.trace = read_trace_csv_file(traces[i]);
        in.label = i < labels.size() ? labels[i]
                                     : std::filesystem::path(traces[i]).stem().string();
        if (in.trace.records.empty()) throw io_error(traces[i] + ": empty trace");
        in.h_star = i < hstars.size() ? hstars[i] : in.trace.records.back().h;
        inputs.push_back(std::move(in));
    }
    {
        std::ofstream os(out);
        if (!os) throw io_error("cannot open '" + out + "' for writing");
        write_plot_data(inputs, os);
    }
    if (!svg.empty()) {
        std::ofstream os(svg);
        if (!os) throw io_error("cannot open '" + svg + "' for writing");
        write_plot_svg(inputs, os);
    }
    std::cout << "wrote " << out << (svg.empty() ? "" : " and " + svg) << "\n";
    return 0;
}

// Expand `--config path` into `--key value` tokens placed right after the
// subcommand name: the config supplies defaults and every explicit flag
// overrides it. Lines are `key=value`; blank lines and #-comments allowed.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> tokens(argv, argv + argc);
    std::string path;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i] == "--config" && i + 1 < tokens.size()) {
            path = tokens[i + 1];
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                         tokens.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (tokens[i].rfind("--config=", 0) == 0) {
            path = tokens[i].substr(9);
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return tokens;
    if (tokens.size() < 2 || tokens[1].empty() || tokens[1][0] == '-')
        throw io_error("--config requires a subcommand");

    std::ifstream is(path);
    if (!is) throw io_error("cannot open config file '" + path + "'");
    std::vector<std::string> expanded;
    std::string line;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq <= start)
            throw io_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(start, eq - start));
        const std::string value = trim(line.substr(eq + 1));
        expanded.push_back("--" + key);
        if (!value.empty()) expanded.push_back(value);
    }
    tokens.insert(tokens.begin() + 2, expanded.begin(), expanded.end());
    return tokens;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"canonical polyadic tensor approximation: ALS, N-GMRES-accelerated ALS, "
                 "and an N-CG baseline"};
    app.require_subcommand(1);

    ProblemFlags problem;
    SolverFlags solver;
    std::uint64_t seed = 0;
    std::string out, trace_path, true_out, noise_free_out, svg;
    bool zero_time = false;
    int seeds = 5, workers = 1;
    std::uint64_t first_seed = 0;
    std::vector<std::string> methods{"als", "ngmres", "ncg"};
    std::vector<int> windows{20};
    std::vector<std::string> trace_files, labels;
    std::vector<double> hstars;
    int lap_d = 3;
    std::string config_path; // consumed before parsing; listed for --help

    auto add_config_option = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "flat key=value file with option defaults; explicit flags override");
    };

    CLI::App* gen_dense = app.add_subcommand("gen-dense", "generate a dense collinear+noise test tensor");
    problem.attach(gen_dense, false);
    gen_dense->add_option("--seed", seed, "generator seed");
    gen_dense->add_option("--out", out, "output tns path")->required();
    gen_dense->add_option("--true-out", true_out, "also write the generating ktensor");
    gen_dense->add_option("--noise-free-out", noise_free_out, "also write the noise-free tensor");
    add_config_option(gen_dense);

    CLI::App* gen_lap = app.add_subcommand("gen-laplacian", "generate a sparse grid Laplacian tensor");
    gen_lap->add_option("--d", lap_d, "grid dimension (tensor order is 2d)")->required();
    gen_lap->add_option("--s", problem.s, "grid points per dimension");
    gen_lap->add_option("--out", out, "output tns path")->required();
    add_config_option(gen_lap);

    CLI::App* solve = app.add_subcommand("solve", "run one solver and write trace/result");
    problem.attach(solve, true);
    solver.attach(solve);
    solve->add_option("--seed", seed, "problem and initial-guess seed");
    solve->add_option("--out", out, "write the final ktensor here");
    solve->add_option("--trace", trace_path, "write the per-iteration trace CSV here");
    solve->add_flag("--zero-time", zero_time, "write zeros in the trace time column (reproducible bytes)");
    add_config_option(solve);

    CLI::App* bench = app.add_subcommand("bench", "sweep methods x windows x seeds, report medians");
    problem.attach(bench, true);
    solver.attach(bench);
    bench->add_option("--methods", methods, "methods to compare");
    bench->add_option("--windows", windows, "ngmres window sizes to sweep");
    bench->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);
    bench->add_option("--seed", first_seed, "first seed of the sweep");
    bench->add_option("--workers", workers, "concurrent seed workers")->check(CLI::PositiveNumber);
    bench->add_option("--out", out, "report CSV path (stdout when omitted)");
    add_config_option(bench);

    CLI::App* plot = app.add_subcommand("plot", "turn trace CSVs into long-format plot data");
    plot->add_option("--trace", trace_files, "input trace CSVs")->required();
    plot->add_option("--labels", labels, "series labels (default: file stems)");
    plot->add_option("--hstar", hstars, "h* per trace (default: final h of each trace)");
    plot->add_option("--out", out, "long-format CSV path")->required();
    plot->add_option("--svg", svg, "also render a two-panel SVG");
    add_config_option(plot);

    try {
        std::vector<std::string> tokens = expand_config(argc, argv);
        std::vector<std::string> args(tokens.begin() + 1, tokens.end());
        std::reverse(args.begin(), args.end()); // CLI11 consumes a reversed vector
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    try {
        if (gen_dense->parsed())
            return cmd_gen_dense(problem, seed, out, true_out, noise_free_out);
        if (gen_lap->parsed()) return cmd_gen_laplacian(lap_d, problem.s, out);
        if (solve->parsed()) return cmd_solve(problem, solver, seed, out, trace_path, zero_time);
        if (bench->parsed())
            return cmd_bench(problem, solver, methods, windows, seeds, first_seed, workers, out);
        if (plot->parsed()) return cmd_plot(trace_files, labels, hstars, out, svg);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
