#pragma once

#include <cmath>
#include <limits>

#include "calmdesk/errors.hpp"

namespace calmdesk::stats {

namespace detail {

template <typename Scalar>
constexpr Scalar tiny() {
    return std::numeric_limits<Scalar>::min() / std::numeric_limits<Scalar>::epsilon();
}

template <typename Scalar>
constexpr Scalar tolerance() {
    return std::numeric_limits<Scalar>::epsilon();
}

inline constexpr int kMaxIterations = 1000;

// Continued fraction for the incomplete beta function, modified Lentz.
template <typename Scalar>
Scalar beta_continued_fraction(Scalar a, Scalar b, Scalar x) {
    const Scalar qab = a + b, qap = a + 1, qam = a - 1;
    Scalar c = 1;
    Scalar d = 1 - qab * x / qap;
    if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
    d = 1 / d;
    Scalar h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const Scalar m2 = Scalar(2 * m);
        Scalar aa = Scalar(m) * (b - Scalar(m)) * x / ((qam + m2) * (a + m2));
        d = 1 + aa * d;
        if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
        c = 1 + aa / c;
        if (std::abs(c) < tiny<Scalar>()) c = tiny<Scalar>();
        d = 1 / d;
        h *= d * c;
        aa = -(a + Scalar(m)) * (qab + Scalar(m)) * x / ((a + m2) * (qap + m2));
        d = 1 + aa * d;
        if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
        c = 1 + aa / c;
        if (std::abs(c) < tiny<Scalar>()) c = tiny<Scalar>();
        d = 1 / d;
        const Scalar del = d * c;
        h *= del;
        if (std::abs(del - 1) <= tolerance<Scalar>()) return h;
    }
    return h;
}

// Series for P(a, x), valid for x < a + 1.
template <typename Scalar>
Scalar gamma_series(Scalar a, Scalar x) {
    Scalar ap = a, sum = 1 / a, del = sum;
    for (int n = 1; n <= kMaxIterations; ++n) {
        ap += 1;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * tolerance<Scalar>()) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1.
template <typename Scalar>
Scalar gamma_continued_fraction(Scalar a, Scalar x) {
    Scalar b = x + 1 - a;
    Scalar c = 1 / tiny<Scalar>();
    Scalar d = 1 / b;
    Scalar h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const Scalar an = -Scalar(i) * (Scalar(i) - a);
        b += 2;
        d = an * d + b;
        if (std::abs(d) < tiny<Scalar>()) d = tiny<Scalar>();
        c = b + an / c;
        if (std::abs(c) < tiny<Scalar>()) c = tiny<Scalar>();
        d = 1 / d;
        const Scalar del = d * c;
        h *= del;
        if (std::abs(del - 1) <= tolerance<Scalar>()) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace detail

// Regularized incomplete beta I_x(a, b).
template <typename Scalar>
Scalar incomplete_beta(Scalar a, Scalar b, Scalar x) {
    if (!(a > 0) || !(b > 0)) throw PreconditionError("incomplete beta needs a, b > 0");
    if (!(x >= 0 && x <= 1)) throw PreconditionError("incomplete beta needs x in [0, 1]");
    if (x == 0) return 0;
    if (x == 1) return 1;
    const Scalar front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1) / (a + b + 2)) return front * detail::beta_continued_fraction(a, b, x) / a;
    return 1 - front * detail::beta_continued_fraction(b, a, Scalar(1) - x) / b;
}

// Regularized lower incomplete gamma P(a, x).
template <typename Scalar>
Scalar incomplete_gamma_p(Scalar a, Scalar x) {
    if (!(a > 0)) throw PreconditionError("incomplete gamma needs a > 0");
    if (!(x >= 0)) throw PreconditionError("incomplete gamma needs x >= 0");
    if (x == 0) return 0;
    if (x < a + 1) return detail::gamma_series(a, x);
    return 1 - detail::gamma_continued_fraction(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
template <typename Scalar>
Scalar incomplete_gamma_q(Scalar a, Scalar x) {
    if (!(a > 0)) throw PreconditionError("incomplete gamma needs a > 0");
    if (!(x >= 0)) throw PreconditionError("incomplete gamma needs x >= 0");
    if (x == 0) return 1;
    if (x < a + 1) return 1 - detail::gamma_series(a, x);
    return detail::gamma_continued_fraction(a, x);
}

// P(|T| >= |t|) for Student's t with df degrees of freedom.
template <typename Scalar>
Scalar student_t_two_sided_p(Scalar t, Scalar df) {
    if (!(df > 0)) throw PreconditionError("t distribution needs df > 0");
    if (std::isnan(t)) throw PreconditionError("t statistic is NaN");
    if (std::isinf(t)) return 0;
    return incomplete_beta(df / 2, Scalar(0.5), df / (df + t * t));
}

template <typename Scalar>
Scalar student_t_cdf(Scalar t, Scalar df) {
    const Scalar tail = student_t_two_sided_p(t, df) / 2;
    return t < 0 ? tail : 1 - tail;
}

// P(X >= x) for chi-square with k degrees of freedom.
template <typename Scalar>
Scalar chi_square_sf(Scalar x, Scalar k) {
    if (!(k > 0)) throw PreconditionError("chi-square needs k > 0");
    if (std::isnan(x)) throw PreconditionError("chi-square statistic is NaN");
    if (x <= 0) return 1;
    if (std::isinf(x)) return 0;
    return incomplete_gamma_q(k / 2, x / 2);
}

template <typename Scalar>
Scalar chi_square_cdf(Scalar x, Scalar k) {
    if (x <= 0) return 0;
    return incomplete_gamma_p(k / 2, x / 2);
}

} // namespace calmdesk::stats
