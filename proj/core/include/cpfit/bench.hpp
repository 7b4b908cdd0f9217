#pragma once

#include "cpfit/line_search.hpp"
#include "cpfit/tensor.hpp"
#include "cpfit/trace.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cpfit {

enum class Method { Als, Ngmres, Ncg };

const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& name);

/// Everything needed to run one solver on one tensor.
struct SolverSettings {
    Method method = Method::Ngmres;
    index_t rank = 3;
    int window = 20; // ngmres only
    double tol_grad = 1e-9;
    int max_iters = 2000;
    double epsilon_reg = 1e-12;
    LineSearchParams line_search{};
};

struct RunOutcome {
    KruskalTensor solution;
    Trace trace;
    StopReason stop_reason;
    double h_star;          // h at the run's own converged (best-f) iterate
    double final_gnorm_rel; // last trace row
};

/// Run one solver from the uniform random start derived from `seed`.
RunOutcome run_solver(const DataTensor& t, const SolverSettings& settings, std::uint64_t seed);

/// The accuracy thresholds of the convergence tables.
inline constexpr std::array<double, 3> kAccuracyTargets = {1e-3, 1e-6, 1e-10};

struct Crossing {
    bool reached = false;
    int iters = 0;
    double time_s = 0.0;
};

/// First trace row with |h - h_star| <= target.
Crossing first_crossing(const Trace& trace, double h_star, double target);

struct BenchCell {
    Method method = Method::Ngmres;
    int window = 20;
};

struct BenchConfig {
    std::vector<BenchCell> cells;
    int seeds = 5;
    std::uint64_t first_seed = 0;
    int workers = 1;
    double hstar_match_tol = 1e-8; // same-stationary-point filter
    SolverSettings base;           // method/window overridden per cell
};

struct BenchRunRow {
    BenchCell cell;
    std::uint64_t seed = 0;
    double h_star = 0.0;
    StopReason stop_reason = StopReason::MaxIters;
    double final_gnorm_rel = 0.0;
    std::array<Crossing, 3> to_target{};
    bool matched = false; // all cells reached the same h* for this seed
};

struct BenchSummaryRow {
    BenchCell cell;
    int matched_runs = 0;
    // medians over matched runs; unreached crossings dominate as +inf
    std::array<double, 3> median_iters{};
    std::array<double, 3> median_time_s{};
};

struct BenchReport {
    std::vector<BenchRunRow> runs;
    std::vector<BenchSummaryRow> summaries;
};

/// Run every cell for every seed (cells x seeds tasks, up to `workers`
/// concurrent), mark seeds whose h* agree across all cells, and compute
/// per-cell medians over the matched seeds. make_problem is invoked once per
/// seed and may ignore it (seed-independent problems still get seed-specific
/// starting points).
BenchReport run_bench(const std::function<DataTensor(std::uint64_t seed)>& make_problem,
                      const BenchConfig& config);

/// Report CSV: one `run` row per (cell, seed) and one `median` row per cell.
void write_report_csv(const BenchReport& report, std::ostream& os);

} // namespace cpfit
