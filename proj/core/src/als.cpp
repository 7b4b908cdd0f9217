#include "cpfit/als.hpp"

#include "cpfit/errors.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

namespace cpfit {

namespace {

// Solve X * G = B for X with G symmetric positive semidefinite (R x R),
// retrying once with a small ridge before giving up.
Matrix solve_normal(const Matrix& gram, const Matrix& rhs) {
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() == Eigen::Success) {
        Matrix x = llt.solve(rhs.transpose()).transpose();
        if (x.allFinite()) return x;
    }
    const double ridge = 1e-12 * gram.trace();
    if (ridge > 0.0) {
        Matrix regularized = gram;
        regularized.diagonal().array() += ridge;
        Eigen::LLT<Matrix> retry(regularized);
        if (retry.info() == Eigen::Success) {
            Matrix x = retry.solve(rhs.transpose()).transpose();
            if (x.allFinite()) return x;
        }
    }
    throw numerical_error("als_sweep: normal matrix is singular after regularization "
                          "(structurally rank-deficient iterate)");
}

} // namespace

KruskalTensor als_sweep(const DataTensor& t, const KruskalTensor& k) {
    if (!(t.shape() == k.shape()))
        throw std::invalid_argument("als_sweep: tensor and model shapes must match");
    KruskalTensor cur = k;
    for (int n = 0; n < cur.order(); ++n) {
        const Matrix rhs = t.mttkrp(cur.factors(), n);
        const Matrix gram = gram_hadamard(cur.factors(), n);
        cur.factor(n) = solve_normal(gram, rhs);
    }
    return normalize_and_reorder(cur);
}

SolveResult als_solve(const DataTensor& t, const KruskalTensor& initial, const AlsOptions& opts) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    KruskalTensor cur = normalize_and_reorder(initial);
    Vector g;
    double f = objective_and_gradient(t, cur, g);
    long fevals = 1, gevals = 1;

    Trace trace;
    auto record = [&](int iter, double fval, double gnorm, int precond, bool restart) {
        trace.records.push_back({iter, elapsed(), fval,
                                 std::sqrt(std::max(2.0 * fval, 0.0)) / t.norm(),
                                 gnorm / t.norm(), fevals, gevals, precond, restart, 0.0});
    };

    double gnorm = g.norm();
    record(0, f, gnorm, 0, false);

    KruskalTensor best = cur;
    double best_f = f;
    StopReason stop = StopReason::MaxIters;

    if (gnorm / t.norm() <= opts.tol_grad) {
        stop = StopReason::GradTol;
        return {std::move(best), std::move(trace), stop};
    }

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        cur = als_sweep(t, cur);
        f = objective_and_gradient(t, cur, g);
        ++fevals;
        ++gevals;
        gnorm = g.norm();
        record(iter, f, gnorm, iter, false);
        if (f < best_f) {
            best_f = f;
            best = cur;
        }
        if (gnorm / t.norm() <= opts.tol_grad) {
            stop = StopReason::GradTol;
            break;
        }
    }
    return {std::move(best), std::move(trace), stop};
}

} // namespace cpfit
