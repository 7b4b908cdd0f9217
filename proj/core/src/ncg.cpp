#include "cpfit/ncg.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace cpfit {

MinimizeResult ncg_minimize(const std::function<double(const Vector&, Vector&)>& eval,
                            const Vector& initial, const NcgOptions& opts, double gradient_scale,
                            const std::function<double(double)>& fit_from_f) {
    if (!(opts.tol_grad > 0.0)) throw std::invalid_argument("ncg: tol_grad must be > 0");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
    auto fit = [&](double f) { return fit_from_f ? fit_from_f(f) : 0.0; };

    Vector u = initial;
    Vector g;
    double f = eval(u, g);
    long fevals = 1, gevals = 1;

    Trace trace;
    auto record = [&](int iter, double fv, double gnorm, bool reset, double beta) {
        trace.records.push_back({iter, elapsed(), fv, fit(fv), gnorm / gradient_scale, fevals,
                                 gevals, 0, reset, beta});
    };
    record(0, f, g.norm(), false, 0.0);

    Vector best_u = u;
    double best_f = f;
    StopReason stop = StopReason::MaxIters;
    if (g.norm() / gradient_scale <= opts.tol_grad) {
        stop = StopReason::GradTol;
        return {std::move(best_u), best_f, std::move(trace), stop};
    }

    Vector direction = -g;
    int consecutive_stalls = 0;

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        bool reset = false;
        double slope = direction.dot(g);
        if (slope >= 0.0) {
            direction = -g;
            slope = -g.squaredNorm();
            reset = true;
        }

        Vector g_trial;
        double last_step = -1.0;
        auto phi = [&](double step, double& fv, double& dg) {
            fv = eval(u + step * direction, g_trial);
            dg = g_trial.dot(direction);
            last_step = step;
        };
        const LineSearchResult ls = more_thuente(phi, f, slope, opts.line_search);
        fevals += ls.evals;
        gevals += ls.evals;

        if (ls.step <= 0.0 || ls.f >= f) {
            // No usable step along this direction; retry once from steepest
            // descent before giving up.
            if (++consecutive_stalls >= 2) {
                stop = StopReason::Stalled;
                break;
            }
            direction = -g;
            continue;
        }
        consecutive_stalls = 0;

        Vector u_next = u + ls.step * direction;
        Vector g_next;
        if (last_step == ls.step) {
            g_next = g_trial; // gradient of the accepted step, already in hand
        } else {
            eval(u_next, g_next);
            ++fevals;
            ++gevals;
        }

        const double pr = g_next.dot(g_next - g) / g.squaredNorm();
        const double pr_plus = std::max(0.0, pr);
        direction = (-g_next + pr_plus * direction).eval();

        u = std::move(u_next);
        f = ls.f;
        g = std::move(g_next);
        const double gnorm = g.norm();
        record(iter, f, gnorm, reset, ls.step);
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
        if (gnorm / gradient_scale <= opts.tol_grad) {
            stop = StopReason::GradTol;
            break;
        }
    }
    return {std::move(best_u), best_f, std::move(trace), stop};
}

SolveResult ncg_solve(const DataTensor& t, const KruskalTensor& initial, const NcgOptions& opts) {
    const Shape shape = initial.shape();
    const index_t rank = initial.rank();
    if (!(t.shape() == shape))
        throw std::invalid_argument("ncg_solve: tensor and model shapes must match");

    auto eval = [&t, shape, rank](const Vector& u, Vector& grad) {
        return objective_and_gradient(t, unpack(u, shape, rank), grad);
    };
    const auto fit = [scale = t.norm()](double f) {
        return std::sqrt(std::max(2.0 * f, 0.0)) / scale;
    };

    MinimizeResult res =
        ncg_minimize(eval, pack(normalize_and_reorder(initial)), opts, t.norm(), fit);
    return {normalize_and_reorder(unpack(res.u, shape, rank)), std::move(res.trace),
            res.stop_reason};
}

} // namespace cpfit
