#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace platcomp {

//! Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

//! Golden-section search for a maximizer of f on [a, b]; f need only be unimodal on the bracket.
template <class F>
double golden_section_max(F&& f, double a, double b, double tol) {
    if (!(b >= a)) throw std::invalid_argument("golden_section_max: empty bracket");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && b - a > tol * std::max(1.0, std::abs(a)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 < f2 ? x2 : x1;
}

//! Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must have opposite signs or be zero.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol) {
    double f_lo = f(lo);
    double f_hi = f(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) throw std::invalid_argument("bisect_root: no sign change on the bracket");
    for (int it = 0; it < 400 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
}

}  // namespace platcomp
