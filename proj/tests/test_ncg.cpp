#include "cpfit/ncg.hpp"

#include "cpfit/als.hpp"
#include "cpfit/problems.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cpfit;
using cpfit::testing::random_kruskal;
using cpfit::testing::random_matrix;

TEST(NcgMinimize, quadratic_near_finite_termination) {
    Rng rng(307);
    const int dim = 5;
    Matrix a = random_matrix(dim, dim, rng);
    a = (a.transpose() * a).eval();
    a.diagonal().array() += 1.0;
    const Vector b = random_matrix(dim, 1, rng);
    const Vector solution = a.ldlt().solve(b); // direct-solve oracle

    auto eval = [&](const Vector& u, Vector& grad) {
        grad = a * u - b;
        return 0.5 * u.dot(a * u) - b.dot(u);
    };
    NcgOptions opts;
    opts.tol_grad = 1e-8;
    opts.max_iters = dim + 2;
    const MinimizeResult res = ncg_minimize(eval, random_matrix(dim, 1, rng), opts);
    EXPECT_EQ(res.stop_reason, StopReason::GradTol);
    EXPECT_LE((a * res.u - b).norm(), 1e-8);
    EXPECT_LE((res.u - solution).norm(), 1e-6 * std::max(1.0, solution.norm()));
}

TEST(NcgMinimize, stationary_start_stops_immediately) {
    Rng rng(311);
    Matrix a = random_matrix(3, 3, rng);
    a = (a.transpose() * a).eval();
    a.diagonal().array() += 1.0;
    const Vector b = random_matrix(3, 1, rng);

    auto eval = [&](const Vector& u, Vector& grad) {
        grad = a * u - b;
        return 0.5 * u.dot(a * u) - b.dot(u);
    };
    NcgOptions opts;
    opts.tol_grad = 1e-8;
    const MinimizeResult res = ncg_minimize(eval, a.ldlt().solve(b), opts);
    EXPECT_EQ(res.stop_reason, StopReason::GradTol);
    EXPECT_EQ(res.trace.records.size(), 1u); // zero iterations
}

TEST(NcgMinimize, monotone_objective) {
    Rng rng(313);
    const Shape shape({5, 4, 6});
    const DataTensor t(full(random_kruskal(shape, 3, rng)));

    NcgOptions opts;
    opts.tol_grad = 1e-10;
    opts.max_iters = 150;
    const SolveResult res = ncg_solve(t, random_kruskal(shape, 3, rng), opts);
    const auto& recs = res.trace.records;
    ASSERT_GE(recs.size(), 2u);
    for (std::size_t i = 1; i < recs.size(); ++i)
        EXPECT_LE(recs[i].f, recs[i - 1].f + 1e-12 * (1.0 + std::abs(recs[i - 1].f)));
}

TEST(NcgSolve, easy_dense_case_converges_but_slower_than_als) {
    // Qualitative ordering on the easy dense problem: ALS needs fewer
    // iterations than N-CG to reach coarse accuracy.
    int als_wins = 0;
    const int seeds = 3;
    for (int seed = 0; seed < seeds; ++seed) {
        const DenseProblemSpec spec{20, 0.5, 3, 1.0, 1.0, static_cast<std::uint64_t>(seed)};
        const DataTensor t(dense_test_problem(spec).data);
        const KruskalTensor start = uniform_initial_guess(t.shape(), 3, spec.seed);

        AlsOptions als_opts;
        als_opts.tol_grad = 1e-7;
        als_opts.max_iters = 400;
        NcgOptions ncg_opts;
        ncg_opts.tol_grad = 1e-7;
        ncg_opts.max_iters = 400;

        const SolveResult als = als_solve(t, start, als_opts);
        const SolveResult ncg = ncg_solve(t, start, ncg_opts);
        EXPECT_NE(ncg.stop_reason, StopReason::Stalled);
        if (als.trace.records.back().iter <= ncg.trace.records.back().iter) ++als_wins;
    }
    EXPECT_GE(als_wins, 2) << "ALS should finish in fewer iterations on most easy cases";
}
