#include "cpfit/bench.hpp"

#include "cpfit/io.hpp"
#include "cpfit/problems.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace cpfit;

TEST(FirstCrossing, picks_first_satisfying_row) {
    Trace trace;
    trace.records.push_back({0, 0.0, 0, 1.0, 0, 0, 0, 0, false, 0});
    trace.records.push_back({1, 0.5, 0, 0.2, 0, 0, 0, 0, false, 0});
    trace.records.push_back({2, 1.0, 0, 0.1001, 0, 0, 0, 0, false, 0});
    trace.records.push_back({3, 1.5, 0, 0.1, 0, 0, 0, 0, false, 0});
    const Crossing c = first_crossing(trace, 0.1, 1e-3);
    EXPECT_TRUE(c.reached);
    EXPECT_EQ(c.iters, 2);
    EXPECT_EQ(c.time_s, 1.0);
    EXPECT_FALSE(first_crossing(trace, 0.5, 1e-3).reached);
}

TEST(RunSolver, deterministic_trace) {
    const DenseProblemSpec spec{6, 0.5, 2, 1.0, 0.0, 5};
    const DataTensor t(dense_test_problem(spec).data);
    SolverSettings settings;
    settings.method = Method::Ngmres;
    settings.rank = 2;
    settings.max_iters = 15;
    settings.tol_grad = 1e-8;
    const RunOutcome a = run_solver(t, settings, 5);
    const RunOutcome b = run_solver(t, settings, 5);
    ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        EXPECT_EQ(a.trace.records[i].f, b.trace.records[i].f);
        EXPECT_EQ(a.trace.records[i].h, b.trace.records[i].h);
        EXPECT_EQ(a.trace.records[i].gnorm_rel, b.trace.records[i].gnorm_rel);
        // the gradient norm only reaches the floor on the stopping row
        if (i + 1 < a.trace.records.size()) EXPECT_GT(a.trace.records[i].gnorm_rel, 0.0);
    }
    EXPECT_EQ(a.h_star, b.h_star);
}

TEST(RunSolver, same_initial_point_across_methods) {
    const DenseProblemSpec spec{6, 0.5, 2, 1.0, 0.0, 7};
    const DataTensor t(dense_test_problem(spec).data);
    SolverSettings settings;
    settings.rank = 2;
    settings.max_iters = 3;
    settings.tol_grad = 1e-12;

    settings.method = Method::Als;
    const RunOutcome als = run_solver(t, settings, 7);
    settings.method = Method::Ngmres;
    const RunOutcome ngmres = run_solver(t, settings, 7);
    settings.method = Method::Ncg;
    const RunOutcome ncg = run_solver(t, settings, 7);
    EXPECT_EQ(als.trace.records[0].f, ngmres.trace.records[0].f);
    EXPECT_EQ(als.trace.records[0].f, ncg.trace.records[0].f);
}

TEST(RunBench, medians_and_matching_filter) {
    const DenseProblemSpec base_spec{6, 0.5, 2, 0.0, 0.0, 0};
    auto make_problem = [&](std::uint64_t seed) {
        DenseProblemSpec spec = base_spec;
        spec.seed = seed;
        return DataTensor(dense_test_problem(spec).data);
    };

    BenchConfig config;
    config.cells = {{Method::Als, 20}, {Method::Ngmres, 5}};
    config.seeds = 3;
    config.first_seed = 0;
    config.workers = 2;
    config.base.rank = 2;
    config.base.tol_grad = 1e-11;
    config.base.max_iters = 250;

    const BenchReport report = run_bench(make_problem, config);
    ASSERT_EQ(report.runs.size(), 6u);
    ASSERT_EQ(report.summaries.size(), 2u);

    for (const BenchRunRow& row : report.runs) {
        // iterations-to-target never decreases as targets tighten
        int prev = -1;
        for (const Crossing& c : row.to_target) {
            if (!c.reached) continue;
            EXPECT_GE(c.iters, prev);
            prev = c.iters;
        }
    }

    std::ostringstream os;
    write_report_csv(report, os);
    const std::string text = os.str();
    EXPECT_NE(text.find("row_type,cell,method,window,seed"), std::string::npos);
    EXPECT_NE(text.find("run,als"), std::string::npos);
    EXPECT_NE(text.find("median,ngmres-w5"), std::string::npos);
}

TEST(Methods, parse_and_print) {
    EXPECT_EQ(parse_method("als"), Method::Als);
    EXPECT_EQ(parse_method("ngmres"), Method::Ngmres);
    EXPECT_EQ(parse_method("ncg"), Method::Ncg);
    EXPECT_FALSE(parse_method("sgd").has_value());
    EXPECT_STREQ(to_string(Method::Ncg), "ncg");
}
