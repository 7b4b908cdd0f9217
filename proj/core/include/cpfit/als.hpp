#pragma once

#include "cpfit/kruskal.hpp"
#include "cpfit/tensor.hpp"
#include "cpfit/trace.hpp"

namespace cpfit {

/// One full alternating-least-squares pass: for each mode in order, replace
/// the factor with the solve of A * GramHadamard(skip=mode) = MTTKRP(mode)
/// against the already-updated earlier modes, then normalize_and_reorder the
/// result. Never increases the objective. Throws cpfit::numerical_error if a
/// mode's normal matrix stays singular after a ridge retry.
KruskalTensor als_sweep(const DataTensor& t, const KruskalTensor& k);

struct AlsOptions {
    double tol_grad = 1e-9; // stop when ||g||_2 / ||T||_F <= tol_grad
    int max_iters = 2000;
};

/// Stand-alone ALS: repeated sweeps with a gradient-based stopping test and
/// per-iteration trace. Returns the best-f iterate seen.
SolveResult als_solve(const DataTensor& t, const KruskalTensor& initial, const AlsOptions& opts);

} // namespace cpfit
