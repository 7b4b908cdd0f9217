#include "cpfit/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpfit {

namespace {

// Trial-step update on the interval of uncertainty (the classic four-case
// cubic/quadratic scheme). (stx, fx, dx) is the endpoint with the least
// function value so far, (sty, fy, dy) the other endpoint, (stp, fp, dp)
// the step just evaluated. Returns the next trial step and updates the
// interval in place.
double interval_step(double& stx, double& fx, double& dx, double& sty, double& fy, double& dy,
                     double stp, double fp, double dp, bool& brackt, double stpmin, double stpmax) {
    const double sgnd = dp * (dx >= 0.0 ? 1.0 : -1.0);
    double stpf = stp;

    if (fp > fx) {
        // Case 1: higher function value; the minimum is bracketed.
        const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
        const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
        double gamma = s * std::sqrt((theta / s) * (theta / s) - (dx / s) * (dp / s));
        if (stp < stx) gamma = -gamma;
        const double p = (gamma - dx) + theta;
        const double q = ((gamma - dx) + gamma) + dp;
        const double r = p / q;
        const double stpc = stx + r * (stp - stx);
        const double stpq = stx + ((dx / ((fx - fp) / (stp - stx) + dx)) / 2.0) * (stp - stx);
        stpf = (std::abs(stpc - stx) < std::abs(stpq - stx)) ? stpc : stpc + (stpq - stpc) / 2.0;
        brackt = true;
    } else if (sgnd < 0.0) {
        // Case 2: lower value, derivatives of opposite sign.
        const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
        const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
        double gamma = s * std::sqrt((theta / s) * (theta / s) - (dx / s) * (dp / s));
        if (stp > stx) gamma = -gamma;
        const double p = (gamma - dp) + theta;
        const double q = ((gamma - dp) + gamma) + dx;
        const double r = p / q;
        const double stpc = stp + r * (stx - stp);
        const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
        stpf = (std::abs(stpc - stp) > std::abs(stpq - stp)) ? stpc : stpq;
        brackt = true;
    } else if (std::abs(dp) < std::abs(dx)) {
        // Case 3: lower value, same sign, decreasing derivative magnitude.
        const double theta = 3.0 * (fx - fp) / (stp - stx) + dx + dp;
        const double s = std::max({std::abs(theta), std::abs(dx), std::abs(dp)});
        // The cubic may not have a minimizer beyond stp.
        double gamma = s * std::sqrt(std::max(0.0, (theta / s) * (theta / s) - (dx / s) * (dp / s)));
        if (stp > stx) gamma = -gamma;
        const double p = (gamma - dp) + theta;
        const double q = (gamma + (dx - dp)) + gamma;
        const double r = p / q;
        double stpc;
        if (r < 0.0 && gamma != 0.0) {
            stpc = stp + r * (stx - stp);
        } else if (stp > stx) {
            stpc = stpmax;
        } else {
            stpc = stpmin;
        }
        const double stpq = stp + (dp / (dp - dx)) * (stx - stp);
        if (brackt) {
            stpf = (std::abs(stpc - stp) < std::abs(stpq - stp)) ? stpc : stpq;
            if (stp > stx)
                stpf = std::min(stp + 0.66 * (sty - stp), stpf);
            else
                stpf = std::max(stp + 0.66 * (sty - stp), stpf);
        } else {
            stpf = (std::abs(stpc - stp) > std::abs(stpq - stp)) ? stpc : stpq;
            stpf = std::clamp(stpf, stpmin, stpmax);
        }
    } else {
        // Case 4: lower value, same sign, derivative magnitude not decreasing.
        if (brackt) {
            const double theta = 3.0 * (fp - fy) / (sty - stp) + dy + dp;
            const double s = std::max({std::abs(theta), std::abs(dy), std::abs(dp)});
            double gamma = s * std::sqrt((theta / s) * (theta / s) - (dy / s) * (dp / s));
            if (stp > sty) gamma = -gamma;
            const double p = (gamma - dp) + theta;
            const double q = ((gamma - dp) + gamma) + dy;
            const double r = p / q;
            stpf = stp + r * (sty - stp);
        } else {
            stpf = (stp > stx) ? stpmax : stpmin;
        }
    }

    // Update the interval of uncertainty.
    if (fp > fx) {
        sty = stp;
        fy = fp;
        dy = dp;
    } else {
        if (sgnd < 0.0) {
            sty = stx;
            fy = fx;
            dy = dx;
        }
        stx = stp;
        fx = fp;
        dx = dp;
    }
    return stpf;
}

} // namespace

LineSearchResult more_thuente(const LineSearchEval& eval, double phi0, double dphi0,
                              const LineSearchParams& p) {
    if (!(p.ftol > 0.0 && p.ftol < p.gtol && p.gtol < 1.0))
        throw std::invalid_argument("more_thuente: need 0 < ftol < gtol < 1");
    if (!(p.initial_step > 0.0)) throw std::invalid_argument("more_thuente: initial_step must be > 0");
    if (p.max_evals < 1) throw std::invalid_argument("more_thuente: max_evals must be >= 1");
    if (!(p.step_min >= 0.0 && p.step_min < p.step_max))
        throw std::invalid_argument("more_thuente: need 0 <= step_min < step_max");

    LineSearchResult out;
    if (dphi0 >= 0.0) {
        out = {0.0, phi0, dphi0, LineSearchStatus::NotDescent, 0};
        return out;
    }

    constexpr double kXtol = 1e-15; // relative bracket-width resolution
    constexpr double kXtrapLo = 1.1;
    constexpr double kXtrapHi = 4.0;

    const double gtest = p.ftol * dphi0;
    double width = p.step_max - p.step_min;
    double width1 = 2.0 * width;

    double stx = 0.0, fx = phi0, dgx = dphi0;
    double sty = 0.0, fy = phi0, dgy = dphi0;
    double stp = std::clamp(p.initial_step, std::max(p.step_min, 1e-300), p.step_max);
    double stmin = 0.0;
    double stmax = stp + kXtrapHi * stp;
    bool brackt = false;
    bool stage1 = true;

    double best_step = 0.0, best_f = phi0, best_dg = dphi0;
    int evals = 0;

    while (true) {
        double f = 0.0, dg = 0.0;
        eval(stp, f, dg);
        ++evals;
        if (f < best_f) {
            best_step = stp;
            best_f = f;
            best_dg = dg;
        }

        const double ftest = phi0 + stp * gtest;
        if (stage1 && f <= ftest && dg >= std::min(p.ftol, p.gtol) * dphi0) stage1 = false;

        if (f <= ftest && std::abs(dg) <= p.gtol * (-dphi0)) {
            out = {stp, f, dg, LineSearchStatus::Converged, evals};
            return out;
        }
        if (evals >= p.max_evals) {
            out = {best_step, best_f, best_dg, LineSearchStatus::MaxEvals, evals};
            return out;
        }
        if (brackt && (stp <= stmin || stp >= stmax)) {
            out = {best_step, best_f, best_dg, LineSearchStatus::NumericalStall, evals};
            return out;
        }
        if (brackt && stmax - stmin <= kXtol * stmax) {
            out = {best_step, best_f, best_dg, LineSearchStatus::NumericalStall, evals};
            return out;
        }
        if (stp == p.step_max && f <= ftest && dg <= gtest) {
            out = {best_step, best_f, best_dg, LineSearchStatus::MaxEvals, evals};
            return out;
        }
        if (stp == p.step_min && (f > ftest || dg >= gtest)) {
            out = {best_step, best_f, best_dg, LineSearchStatus::NumericalStall, evals};
            return out;
        }

        if (stage1 && f <= fx && f > ftest) {
            // Work with the sufficient-decrease-shifted function in stage 1.
            double fm = f - stp * gtest;
            double fxm = fx - stx * gtest;
            double fym = fy - sty * gtest;
            double dgm = dg - gtest;
            double dgxm = dgx - gtest;
            double dgym = dgy - gtest;
            stp = interval_step(stx, fxm, dgxm, sty, fym, dgym, stp, fm, dgm, brackt, stmin, stmax);
            fx = fxm + stx * gtest;
            fy = fym + sty * gtest;
            dgx = dgxm + gtest;
            dgy = dgym + gtest;
        } else {
            stp = interval_step(stx, fx, dgx, sty, fy, dgy, stp, f, dg, brackt, stmin, stmax);
        }

        if (brackt) {
            // Force the interval to shrink.
            if (std::abs(sty - stx) >= 0.66 * width1) stp = stx + 0.5 * (sty - stx);
            width1 = width;
            width = std::abs(sty - stx);
        }

        if (brackt) {
            stmin = std::min(stx, sty);
            stmax = std::max(stx, sty);
        } else {
            stmin = stp + kXtrapLo * (stp - stx);
            stmax = stp + kXtrapHi * (stp - stx);
        }
        stp = std::clamp(stp, p.step_min, p.step_max);

        // When no further progress is possible, fall back to the best point.
        if ((brackt && (stp <= stmin || stp >= stmax)) ||
            (brackt && stmax - stmin <= kXtol * stmax)) {
            stp = stx;
        }
        if (stp <= 0.0) stp = (stmax > 0.0) ? 0.5 * stmax : p.initial_step;
    }
}

} // namespace cpfit
