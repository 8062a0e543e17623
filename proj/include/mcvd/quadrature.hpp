#pragma once

#include <cmath>
#include <utility>

/// Adaptive Simpson integration with an absolute-error target.
/// Small and self-contained; the integrands in this project are smooth on
/// the transformed intervals they are given, so Richardson-controlled
/// bisection converges quickly.

namespace mcvd::quad {

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;  ///< accumulated local error bounds
    long long evaluations = 0;
    bool converged = true;  ///< false if any subinterval hit the depth cap
};

namespace detail {

template <class F>
void adapt(const F& f, double lo, double hi, double flo, double fmid, double fhi,
           double whole, double tol, int depth, Result& out) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid);
    const double rmid = 0.5 * (mid + hi);
    const double flm = f(lmid);
    const double frm = f(rmid);
    out.evaluations += 2;
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol || (hi - lo) < 1e-14 * (std::fabs(lo) + std::fabs(hi))) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::fabs(delta) / 15.0;
        return;
    }
    if (depth <= 0) {
        out.value += left + right + delta / 15.0;
        out.error_estimate += std::fabs(delta) / 15.0;
        out.converged = false;
        return;
    }
    adapt(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1, out);
    adapt(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// Integrates f over [lo, hi] targeting absolute error abs_tol.
template <class F>
Result integrate(F&& f, double lo, double hi, double abs_tol, int max_depth = 48) {
    Result out;
    if (!(hi > lo)) return out;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo);
    const double fmid = f(mid);
    const double fhi = f(hi);
    out.evaluations = 3;
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    detail::adapt(f, lo, hi, flo, fmid, fhi, whole, abs_tol, max_depth, out);
    return out;
}

}  // namespace mcvd::quad
