#pragma once

#include "cpfit/line_search.hpp"
#include "cpfit/ngmres.hpp"
#include "cpfit/tensor.hpp"
#include "cpfit/trace.hpp"

#include <functional>

namespace cpfit {

struct NcgOptions {
    double tol_grad = 1e-9;
    int max_iters = 2000;
    LineSearchParams line_search{};
};

/// Nonlinear conjugate gradient with the Polak-Ribiere update clamped at
/// zero and a steepest-descent reset whenever the direction fails the
/// descent test. Stops on the relative gradient norm, the iteration budget,
/// or two consecutive line-search stalls.
MinimizeResult ncg_minimize(const std::function<double(const Vector&, Vector&)>& eval,
                            const Vector& initial, const NcgOptions& opts,
                            double gradient_scale = 1.0,
                            const std::function<double(double)>& fit_from_f = {});

/// N-CG on the CP objective. Factors are not renormalized between
/// iterations; the returned solution is normalized once for reporting.
SolveResult ncg_solve(const DataTensor& t, const KruskalTensor& initial, const NcgOptions& opts);

} // namespace cpfit
