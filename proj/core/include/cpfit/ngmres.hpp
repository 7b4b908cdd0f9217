#pragma once

#include "cpfit/line_search.hpp"
#include "cpfit/tensor.hpp"
#include "cpfit/trace.hpp"

#include <deque>
#include <functional>
#include <optional>
#include <utility>

namespace cpfit {

/// Ring of up to `capacity` past (iterate, gradient) pairs, oldest first.
/// Every stored gradient was evaluated at its iterate.
class AccelWindow {
public:
    explicit AccelWindow(std::size_t capacity);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Append a pair, evicting the oldest beyond capacity.
    void push(Vector u, Vector g);
    /// Shrink back to exactly this one pair (window restart).
    void reset(Vector u, Vector g);

    const Vector& iterate(std::size_t i) const { return entries_[i].first; }
    const Vector& gradient(std::size_t i) const { return entries_[i].second; }

private:
    std::size_t capacity_;
    std::deque<std::pair<Vector, Vector>> entries_;
};

struct AccelOutcome {
    Vector u_hat;
    Vector alpha;
    double system_residual_rel; // relative residual of the regularized normal solve
};

/// Windowed recombination step: build p_j = g_bar - g(u_j), solve
/// (P^T P + delta I) alpha = -P^T g_bar with delta = epsilon_reg * max
/// diagonal of P^T P (epsilon_reg itself when that max is zero), and return
/// u_hat = u_bar + sum_j alpha_j (u_bar - u_j).
AccelOutcome accelerate(const AccelWindow& window, const Vector& u_bar, const Vector& g_bar,
                        double epsilon_reg);

struct NgmresOptions {
    int window = 20;
    double epsilon_reg = 1e-12;
    double tol_grad = 1e-9; // on ||g||_2 / gradient scale
    int max_iters = 2000;
    LineSearchParams line_search{};
    bool restart_on_ascent = true;
};

/// A smooth minimization problem plus the one-step process to accelerate.
/// ngmres_solve instantiates this for the CP objective; tests instantiate it
/// directly (e.g. with a quadratic objective and a stationary linear
/// iteration) to exercise the driver.
struct NgmresProblem {
    /// Returns f(u) and fills grad. Counted as one f- and one g-evaluation.
    std::function<double(const Vector& u, Vector& grad)> eval;
    /// One-step update process M(.). Its output must already be canonical.
    std::function<Vector(const Vector& u)> precondition;
    /// Canonical form of an iterate (identity when absent).
    std::function<Vector(const Vector& u)> canonicalize;
    /// ||g||_2 is divided by this in the stopping test and trace.
    double gradient_scale = 1.0;
    /// Optional map from f to the trace's h column.
    std::function<double(double f)> fit_from_f;
    /// Diagnostics hook: force Step III to this step instead of line searching.
    std::optional<double> fixed_step;
    /// Test hook, called after Step II with the window the step used.
    std::function<void(const AccelWindow& window, const Vector& u_bar, const Vector& g_bar,
                       const Vector& u_hat)>
        observer;
};

struct MinimizeResult {
    Vector u; // best-f iterate seen
    double f;
    Trace trace;
    StopReason stop_reason;
};

/// Mutable state threaded through the iteration: the current iterate (in
/// canonical form), its objective value and gradient, the window of past
/// pairs, and cumulative evaluation counters.
struct NgmresState {
    AccelWindow window;
    Vector u;
    Vector g;
    double f = 0.0;
    long fevals = 0;
    long gevals = 0;
};

/// Initial state: canonicalize, evaluate, seed the window with the pair.
NgmresState ngmres_init(const NgmresProblem& problem, const Vector& initial,
                        const NgmresOptions& opts);

struct NgmresStepReport {
    bool restart = false; // descent test failed; window was reset to size one
    bool stalled = false; // the line search reported a numerical stall
    double beta = 0.0;    // accepted step along u_hat - u_bar
};

/// One three-step iteration: preconditioner step, windowed least-squares
/// acceleration, then either the descent-test restart (accept the
/// preliminary iterate, window back to one) or a line search towards the
/// accelerated iterate. The accepted iterate is canonicalized and appended
/// to the window with its gradient.
NgmresStepReport ngmres_step(const NgmresProblem& problem, NgmresState& state,
                             const NgmresOptions& opts);

/// Full driver: repeat ngmres_step (the window grows from one up to
/// capacity), stop on the relative gradient norm, the iteration budget, or
/// two consecutive stalls. Runs at least one iteration and returns the
/// best-f iterate seen, with one trace row per accepted iterate.
MinimizeResult ngmres_minimize(const NgmresProblem& problem, const Vector& initial,
                               const NgmresOptions& opts);

/// N-GMRES-accelerated ALS for the CP objective.
SolveResult ngmres_solve(const DataTensor& t, const KruskalTensor& initial,
                         const NgmresOptions& opts);

} // namespace cpfit
