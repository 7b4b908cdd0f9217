#pragma once

#include <functional>

namespace cpfit {

struct LineSearchParams {
    double ftol = 1e-4;      // sufficient-decrease constant
    double gtol = 1e-2;      // curvature constant
    double initial_step = 1.0;
    int max_evals = 20;
    double step_min = 0.0;
    double step_max = 1e20;
};

enum class LineSearchStatus {
    Converged,      // strong Wolfe conditions hold at the returned step
    MaxEvals,       // budget exhausted; best evaluated step returned
    NotDescent,     // phi'(0) >= 0
    NumericalStall, // bracket collapsed below machine resolution
};

struct LineSearchResult {
    double step = 0.0;
    double f = 0.0;  // phi(step)
    double dg = 0.0; // phi'(step)
    LineSearchStatus status = LineSearchStatus::NotDescent;
    int evals = 0; // eval() calls at trial steps (beta > 0)
};

/// phi and phi' at a trial step along the ray.
using LineSearchEval = std::function<void(double step, double& f, double& dg)>;

/// More-Thuente line search: bracketing with cubic/quadratic interpolation,
/// returning a step satisfying the strong Wolfe conditions
///   phi(b) <= phi(0) + ftol*b*phi'(0)   and   |phi'(b)| <= gtol*|phi'(0)|.
/// phi0/dphi0 are the caller's (typically cached) values at step 0; eval is
/// only invoked at steps > 0. If the budget runs out the best evaluated step
/// is returned with status MaxEvals; step 0 can only come back under
/// NumericalStall and means "stay at the origin".
LineSearchResult more_thuente(const LineSearchEval& eval, double phi0, double dphi0,
                              const LineSearchParams& params);

} // namespace cpfit
