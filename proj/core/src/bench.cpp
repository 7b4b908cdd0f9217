#include "cpfit/bench.hpp"

#include "cpfit/als.hpp"
#include "cpfit/io.hpp"
#include "cpfit/ncg.hpp"
#include "cpfit/ngmres.hpp"
#include "cpfit/problems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

namespace cpfit {

const char* to_string(Method m) {
    switch (m) {
    case Method::Als: return "als";
    case Method::Ngmres: return "ngmres";
    case Method::Ncg: return "ncg";
    }
    return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
    if (name == "als") return Method::Als;
    if (name == "ngmres") return Method::Ngmres;
    if (name == "ncg") return Method::Ncg;
    return std::nullopt;
}

RunOutcome run_solver(const DataTensor& t, const SolverSettings& s, std::uint64_t seed) {
    const KruskalTensor start = uniform_initial_guess(t.shape(), s.rank, seed);
    SolveResult res = [&] {
        switch (s.method) {
        case Method::Als: {
            AlsOptions o{s.tol_grad, s.max_iters};
            return als_solve(t, start, o);
        }
        case Method::Ncg: {
            NcgOptions o{s.tol_grad, s.max_iters, s.line_search};
            return ncg_solve(t, start, o);
        }
        case Method::Ngmres:
        default: {
            NgmresOptions o;
            o.window = s.window;
            o.epsilon_reg = s.epsilon_reg;
            o.tol_grad = s.tol_grad;
            o.max_iters = s.max_iters;
            o.line_search = s.line_search;
            return ngmres_solve(t, start, o);
        }
        }
    }();
    const double h_star = fit_h(t, res.solution);
    const double final_gnorm = res.trace.records.back().gnorm_rel;
    return {std::move(res.solution), std::move(res.trace), res.stop_reason, h_star, final_gnorm};
}

Crossing first_crossing(const Trace& trace, double h_star, double target) {
    for (const TraceRecord& r : trace.records)
        if (std::abs(r.h - h_star) <= target) return {true, r.iter, r.time_s};
    return {};
}

namespace {

double median_of(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

BenchReport run_bench(const std::function<DataTensor(std::uint64_t seed)>& make_problem,
                      const BenchConfig& config) {
    const std::size_t n_seeds = static_cast<std::size_t>(config.seeds);
    const std::size_t n_cells = config.cells.size();
    BenchReport report;
    report.runs.resize(n_seeds * n_cells);

    // Seed-level tasks so each worker builds its problem once.
    std::atomic<std::size_t> next_seed{0};
    auto worker = [&] {
        while (true) {
            const std::size_t si = next_seed.fetch_add(1);
            if (si >= n_seeds) return;
            const std::uint64_t seed = config.first_seed + si;
            const DataTensor problem = make_problem(seed);
            for (std::size_t ci = 0; ci < n_cells; ++ci) {
                SolverSettings settings = config.base;
                settings.method = config.cells[ci].method;
                settings.window = config.cells[ci].window;
                RunOutcome out = run_solver(problem, settings, seed);
                BenchRunRow& row = report.runs[si * n_cells + ci];
                row.cell = config.cells[ci];
                row.seed = seed;
                row.h_star = out.h_star;
                row.stop_reason = out.stop_reason;
                row.final_gnorm_rel = out.final_gnorm_rel;
                for (std::size_t k = 0; k < kAccuracyTargets.size(); ++k)
                    row.to_target[k] = first_crossing(out.trace, out.h_star, kAccuracyTargets[k]);
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(n_seeds)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Same-stationary-point filter: a seed counts only when every cell
    // converged to the same h*.
    for (std::size_t si = 0; si < n_seeds; ++si) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t ci = 0; ci < n_cells; ++ci) {
            const double h = report.runs[si * n_cells + ci].h_star;
            lo = std::min(lo, h);
            hi = std::max(hi, h);
        }
        const bool matched = (hi - lo) <= config.hstar_match_tol;
        for (std::size_t ci = 0; ci < n_cells; ++ci)
            report.runs[si * n_cells + ci].matched = matched;
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (std::size_t ci = 0; ci < n_cells; ++ci) {
        BenchSummaryRow summary;
        summary.cell = config.cells[ci];
        std::array<std::vector<double>, 3> iters, times;
        for (std::size_t si = 0; si < n_seeds; ++si) {
            const BenchRunRow& row = report.runs[si * n_cells + ci];
            if (!row.matched) continue;
            ++summary.matched_runs;
            for (std::size_t k = 0; k < 3; ++k) {
                iters[k].push_back(row.to_target[k].reached ? row.to_target[k].iters : kInf);
                times[k].push_back(row.to_target[k].reached ? row.to_target[k].time_s : kInf);
            }
        }
        for (std::size_t k = 0; k < 3; ++k) {
            summary.median_iters[k] = median_of(iters[k]);
            summary.median_time_s[k] = median_of(times[k]);
        }
        report.summaries.push_back(summary);
    }
    return report;
}

namespace {

std::string cell_name(const BenchCell& cell) {
    std::string name = to_string(cell.method);
    if (cell.method == Method::Ngmres) name += "-w" + std::to_string(cell.window);
    return name;
}

std::string field_or_empty(bool present, double value) {
    if (!present || std::isinf(value) || std::isnan(value)) return "";
    return format_double(value);
}

} // namespace

void write_report_csv(const BenchReport& report, std::ostream& os) {
    os << "row_type,cell,method,window,seed,matched,h_star,stop_reason,final_gnorm_rel,"
          "iters_1e-3,time_1e-3,iters_1e-6,time_1e-6,iters_1e-10,time_1e-10\n";
    for (const BenchRunRow& r : report.runs) {
        os << "run," << cell_name(r.cell) << ',' << to_string(r.cell.method) << ','
           << r.cell.window << ',' << r.seed << ',' << (r.matched ? 1 : 0) << ','
           << format_double(r.h_star) << ',' << to_string(r.stop_reason) << ','
           << format_double(r.final_gnorm_rel);
        for (const Crossing& c : r.to_target)
            os << ',' << field_or_empty(c.reached, c.iters) << ','
               << field_or_empty(c.reached, c.time_s);
        os << '\n';
    }
    for (const BenchSummaryRow& s : report.summaries) {
        os << "median," << cell_name(s.cell) << ',' << to_string(s.cell.method) << ','
           << s.cell.window << ",," << s.matched_runs << ",,,";
        for (std::size_t k = 0; k < 3; ++k)
            os << ',' << field_or_empty(true, s.median_iters[k]) << ','
               << field_or_empty(true, s.median_time_s[k]);
        os << '\n';
    }
}

} // namespace cpfit
