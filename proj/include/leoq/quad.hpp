#pragma once

#include <cmath>
#include <stdexcept>

namespace leoq {

namespace detail {

template <typename F>
double simpson(F&& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adapt(F&& f, double a, double fa, double b, double fb, double m, double fm, double whole,
             double tol, int depth, int force) {
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = simpson(f, a, fa, m, fm, lm, flm);
    double right = simpson(f, m, fm, b, fb, rm, frm);
    double delta = left + right - whole;
    if (depth <= 0) {
        if (std::abs(delta) > 1e3 * tol) {
            throw std::runtime_error("adaptive quadrature failed to converge");
        }
        return left + right + delta / 15.0;
    }
    // force the first few splits so narrow features cannot hide between the
    // initial sample points
    if (force <= 0 && std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, force - 1) +
           adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, force - 1);
}

} // namespace detail

// Adaptive Simpson on [a, b] with absolute tolerance.
template <typename F>
double integrate(F&& f, double a, double b, double tol = 1e-12, int max_depth = 48,
                 int min_depth = 8) {
    if (!(b > a)) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a);
    double fb = f(b);
    double fm = f(m);
    double whole = detail::simpson(f, a, fa, b, fb, m, fm);
    return detail::adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth, min_depth);
}

} // namespace leoq
