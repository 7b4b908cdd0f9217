#include "cpfit/ngmres.hpp"

#include "cpfit/als.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace cpfit {

AccelWindow::AccelWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw std::invalid_argument("AccelWindow: capacity must be >= 1");
}

void AccelWindow::push(Vector u, Vector g) {
    entries_.emplace_back(std::move(u), std::move(g));
    while (entries_.size() > capacity_) entries_.pop_front();
}

void AccelWindow::reset(Vector u, Vector g) {
    entries_.clear();
    entries_.emplace_back(std::move(u), std::move(g));
}

AccelOutcome accelerate(const AccelWindow& window, const Vector& u_bar, const Vector& g_bar,
                        double epsilon_reg) {
    if (window.empty()) throw std::invalid_argument("accelerate: window must be nonempty");
    const auto m = static_cast<index_t>(window.size());

    Matrix p(g_bar.size(), m);
    for (index_t j = 0; j < m; ++j)
        p.col(j) = g_bar - window.gradient(static_cast<std::size_t>(j));

    Matrix lhs = p.transpose() * p;
    const double dmax = lhs.diagonal().maxCoeff();
    const double delta = (dmax > 0.0) ? epsilon_reg * dmax : epsilon_reg;
    lhs.diagonal().array() += delta;
    const Vector rhs = -p.transpose() * g_bar;

    Vector alpha;
    double residual_rel = 0.0;
    if (rhs.norm() == 0.0) {
        alpha = Vector::Zero(m);
    } else {
        // Solve the regularized normal equations through the equivalent
        // damped least-squares form min ||P a + g||^2 + delta ||a||^2; the
        // QR of the stacked matrix avoids squaring the condition number.
        Matrix stacked(g_bar.size() + m, m);
        stacked.topRows(g_bar.size()) = p;
        stacked.bottomRows(m) = std::sqrt(delta) * Matrix::Identity(m, m);
        Vector stacked_rhs = Vector::Zero(g_bar.size() + m);
        stacked_rhs.head(g_bar.size()) = -g_bar;
        alpha = stacked.colPivHouseholderQr().solve(stacked_rhs);
        residual_rel = (lhs * alpha - rhs).norm() / rhs.norm();
    }

    Vector u_hat = u_bar;
    for (index_t j = 0; j < m; ++j)
        u_hat += alpha[j] * (u_bar - window.iterate(static_cast<std::size_t>(j)));
    return {std::move(u_hat), std::move(alpha), residual_rel};
}

namespace {

Vector canonical(const NgmresProblem& problem, const Vector& u) {
    return problem.canonicalize ? problem.canonicalize(u) : u;
}

} // namespace

NgmresState ngmres_init(const NgmresProblem& problem, const Vector& initial,
                        const NgmresOptions& opts) {
    if (opts.window < 1) throw std::invalid_argument("ngmres: window must be >= 1");
    if (!(opts.tol_grad > 0.0)) throw std::invalid_argument("ngmres: tol_grad must be > 0");
    if (opts.epsilon_reg < 0.0) throw std::invalid_argument("ngmres: epsilon_reg must be >= 0");

    NgmresState state{AccelWindow(static_cast<std::size_t>(opts.window)), canonical(problem, initial),
                      Vector{}, 0.0, 0, 0};
    state.f = problem.eval(state.u, state.g);
    state.fevals = state.gevals = 1;
    state.window.push(state.u, state.g);
    return state;
}

NgmresStepReport ngmres_step(const NgmresProblem& problem, NgmresState& state,
                             const NgmresOptions& opts) {
    // Step I: preliminary iterate from the one-step process.
    const Vector u_bar = problem.precondition(state.u);
    Vector g_bar;
    const double f_bar = problem.eval(u_bar, g_bar);
    ++state.fevals;
    ++state.gevals;

    // Step II: windowed recombination.
    const AccelOutcome accel = accelerate(state.window, u_bar, g_bar, opts.epsilon_reg);
    if (problem.observer) problem.observer(state.window, u_bar, g_bar, accel.u_hat);

    const Vector direction = accel.u_hat - u_bar;
    const double slope = g_bar.dot(direction);

    // Step III: line search from u_bar towards u_hat, guarded by the descent
    // restart test. A failed search keeps u_bar (the one-step process already
    // made progress).
    NgmresStepReport report;
    Vector u_next;
    double f_next;
    Vector g_next;

    if (opts.restart_on_ascent && slope >= 0.0) {
        report.restart = true;
        u_next = u_bar;
        f_next = f_bar;
        g_next = g_bar;
    } else if (problem.fixed_step) {
        report.beta = *problem.fixed_step;
        u_next = canonical(problem, u_bar + report.beta * direction);
        f_next = problem.eval(u_next, g_next);
        ++state.fevals;
        ++state.gevals;
    } else if (slope >= 0.0) {
        // restarts disabled and no descent available: keep u_bar
        u_next = u_bar;
        f_next = f_bar;
        g_next = g_bar;
    } else {
        Vector g_trial;
        auto phi = [&](double step, double& fv, double& dg) {
            fv = problem.eval(u_bar + step * direction, g_trial);
            dg = g_trial.dot(direction);
        };
        const LineSearchResult ls = more_thuente(phi, f_bar, slope, opts.line_search);
        state.fevals += ls.evals;
        state.gevals += ls.evals;
        if (ls.status == LineSearchStatus::NumericalStall) report.stalled = true;
        if (ls.step > 0.0 && ls.f <= f_bar) {
            report.beta = ls.step;
            u_next = canonical(problem, u_bar + report.beta * direction);
            f_next = problem.eval(u_next, g_next);
            ++state.fevals;
            ++state.gevals;
        } else {
            u_next = u_bar;
            f_next = f_bar;
            g_next = g_bar;
        }
    }

    if (report.restart)
        state.window.reset(u_next, g_next);
    else
        state.window.push(u_next, g_next);
    state.u = std::move(u_next);
    state.f = f_next;
    state.g = std::move(g_next);
    return report;
}

MinimizeResult ngmres_minimize(const NgmresProblem& problem, const Vector& initial,
                               const NgmresOptions& opts) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
    auto fit = [&](double f) { return problem.fit_from_f ? problem.fit_from_f(f) : 0.0; };

    NgmresState state = ngmres_init(problem, initial, opts);

    Trace trace;
    auto record = [&](int iter, bool restart, double beta) {
        trace.records.push_back({iter, elapsed(), state.f, fit(state.f),
                                 state.g.norm() / problem.gradient_scale, state.fevals,
                                 state.gevals, iter, restart, beta});
    };
    record(0, false, 0.0);

    Vector best_u = state.u;
    double best_f = state.f;
    StopReason stop = StopReason::MaxIters;
    int consecutive_stalls = 0;

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        const NgmresStepReport report = ngmres_step(problem, state, opts);
        record(iter, report.restart, report.beta);
        if (state.f < best_f) {
            best_f = state.f;
            best_u = state.u;
        }
        consecutive_stalls = report.stalled ? consecutive_stalls + 1 : 0;
        if (consecutive_stalls >= 2) {
            stop = StopReason::Stalled;
            break;
        }
        if (state.g.norm() / problem.gradient_scale <= opts.tol_grad) {
            stop = StopReason::GradTol;
            break;
        }
    }
    return {std::move(best_u), best_f, std::move(trace), stop};
}

SolveResult ngmres_solve(const DataTensor& t, const KruskalTensor& initial,
                         const NgmresOptions& opts) {
    const Shape shape = initial.shape();
    const index_t rank = initial.rank();
    if (!(t.shape() == shape))
        throw std::invalid_argument("ngmres_solve: tensor and model shapes must match");

    NgmresProblem problem;
    problem.eval = [&t, shape, rank](const Vector& u, Vector& grad) {
        return objective_and_gradient(t, unpack(u, shape, rank), grad);
    };
    problem.precondition = [&t, shape, rank](const Vector& u) {
        return pack(als_sweep(t, unpack(u, shape, rank)));
    };
    problem.canonicalize = [shape, rank](const Vector& u) {
        return pack(normalize_and_reorder(unpack(u, shape, rank)));
    };
    problem.gradient_scale = t.norm();
    problem.fit_from_f = [scale = t.norm()](double f) {
        return std::sqrt(std::max(2.0 * f, 0.0)) / scale;
    };

    MinimizeResult res = ngmres_minimize(problem, pack(initial), opts);
    return {unpack(res.u, shape, rank), std::move(res.trace), res.stop_reason};
}

} // namespace cpfit
