#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calmdesk/errors.hpp"
#include "calmdesk/stats/distributions.hpp"

namespace calmdesk::stats {

template <typename Scalar>
struct BasicTestResult {
    Scalar statistic = 0;
    Scalar p_value = 1;
    Scalar df = 0;
    Scalar effect_size_d = 0;
    std::size_t n = 0;
};

using TestResult = BasicTestResult<double>;

enum class EffectMode { pooled, paired };

template <typename Derived>
typename Derived::Scalar mean(const Eigen::ArrayBase<Derived>& x) {
    return x.mean();
}

// Sample standard deviation (n - 1 denominator).
template <typename Derived>
typename Derived::Scalar sample_sd(const Eigen::ArrayBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    if (x.size() < 2) throw DegenerateSampleError("standard deviation needs n >= 2");
    const Scalar m = x.mean();
    return std::sqrt((x - m).square().sum() / Scalar(x.size() - 1));
}

namespace detail {

template <typename DerivedA, typename DerivedB>
void check_paired(const Eigen::ArrayBase<DerivedA>& a, const Eigen::ArrayBase<DerivedB>& b) {
    if (a.size() != b.size())
        throw LengthMismatchError("paired samples differ in length: " + std::to_string(a.size()) + " vs " +
                                  std::to_string(b.size()));
    if (a.size() < 2) throw DegenerateSampleError("paired sample needs n >= 2");
}

} // namespace detail

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cohens_d(const Eigen::ArrayBase<DerivedA>& a, const Eigen::ArrayBase<DerivedB>& b,
                                   EffectMode mode = EffectMode::pooled) {
    using Scalar = typename DerivedA::Scalar;
    detail::check_paired(a, b);
    if (mode == EffectMode::paired) {
        const Eigen::Array<Scalar, Eigen::Dynamic, 1> d = a - b;
        const Scalar sd = sample_sd(d);
        if (sd == 0) throw DegenerateSampleError("differences have zero variance");
        return d.mean() / sd;
    }
    const auto n = Scalar(a.size());
    const Scalar sa = sample_sd(a), sb = sample_sd(b);
    const Scalar pooled = std::sqrt(((n - 1) * sa * sa + (n - 1) * sb * sb) / (2 * n - 2));
    if (pooled == 0) throw DegenerateSampleError("both samples have zero variance");
    return (a.mean() - b.mean()) / pooled;
}

// t = mean(d) / (sd(d) / sqrt(n)), d = a - b, df = n - 1, two-sided p.
template <typename DerivedA, typename DerivedB>
BasicTestResult<typename DerivedA::Scalar> paired_t(const Eigen::ArrayBase<DerivedA>& a,
                                                    const Eigen::ArrayBase<DerivedB>& b,
                                                    EffectMode mode = EffectMode::pooled) {
    using Scalar = typename DerivedA::Scalar;
    detail::check_paired(a, b);
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> d = a - b;
    const Scalar sd = sample_sd(d);
    if (sd == 0) throw DegenerateSampleError("differences have zero variance");
    BasicTestResult<Scalar> r;
    r.n = static_cast<std::size_t>(d.size());
    r.df = Scalar(d.size() - 1);
    r.statistic = d.mean() / (sd / std::sqrt(Scalar(d.size())));
    r.p_value = student_t_two_sided_p(r.statistic, r.df);
    r.effect_size_d = cohens_d(a, b, mode);
    return r;
}

// Mid-ranks (1-based) of x, ties sharing the mean of their positions.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> mid_ranks(const Eigen::ArrayBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const auto n = static_cast<std::size_t>(x.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x(i) < x(j); });
    Eigen::Array<Scalar, Eigen::Dynamic, 1> ranks(x.size());
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x(order[j + 1]) == x(order[i])) ++j;
        const Scalar r = Scalar(i + j + 2) / 2;
        for (std::size_t k = i; k <= j; ++k) ranks(order[k]) = r;
        i = j + 1;
    }
    return ranks;
}

// H statistic with tie correction; p from chi-square with k - 1 df.
// effect_size_d is not applicable and reported as 0.
template <typename Scalar>
BasicTestResult<Scalar> kruskal_wallis(std::span<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> groups) {
    if (groups.size() < 2) throw DegenerateSampleError("kruskal-wallis needs at least 2 groups");
    Eigen::Index total = 0;
    for (const auto& g : groups) {
        if (g.size() == 0) throw DegenerateSampleError("kruskal-wallis group is empty");
        total += g.size();
    }
    if (total < 3) throw DegenerateSampleError("kruskal-wallis needs N >= 3");

    Eigen::Array<Scalar, Eigen::Dynamic, 1> pooled(total);
    Eigen::Index at = 0;
    for (const auto& g : groups) {
        pooled.segment(at, g.size()) = g;
        at += g.size();
    }
    const auto ranks = mid_ranks(pooled);

    const Scalar N = Scalar(total);
    Scalar sum = 0;
    at = 0;
    for (const auto& g : groups) {
        const Scalar r = ranks.segment(at, g.size()).sum();
        sum += r * r / Scalar(g.size());
        at += g.size();
    }
    Scalar h = Scalar(12) / (N * (N + 1)) * sum - 3 * (N + 1);

    std::vector<Scalar> sorted(pooled.data(), pooled.data() + total);
    std::sort(sorted.begin(), sorted.end());
    Scalar ties = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const Scalar t = Scalar(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const Scalar correction = 1 - ties / (N * N * N - N);
    if (correction == 0) throw AllTiedError("every observation is identical");
    h /= correction;
    if (h < 0) h = 0;  // rounding on exactly balanced ranks

    BasicTestResult<Scalar> r;
    r.statistic = h;
    r.df = Scalar(groups.size() - 1);
    r.p_value = chi_square_sf(h, r.df);
    r.n = static_cast<std::size_t>(total);
    return r;
}

template <typename Scalar>
BasicTestResult<Scalar> kruskal_wallis(const std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>>& groups) {
    return kruskal_wallis(std::span<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>(groups));
}

// adjusted_i = min(1, p_i * m); m >= p.size().
template <typename Scalar>
std::vector<Scalar> bonferroni(std::span<const Scalar> p_values, std::size_t m) {
    if (m == 0 || m < p_values.size()) throw PreconditionError("bonferroni needs m >= number of p-values");
    std::vector<Scalar> out;
    out.reserve(p_values.size());
    for (const Scalar p : p_values) {
        if (!(p >= 0 && p <= 1)) throw PreconditionError("p-value outside [0, 1]");
        out.push_back(std::min(Scalar(1), p * Scalar(m)));
    }
    return out;
}

template <typename Scalar>
std::vector<Scalar> bonferroni(const std::vector<Scalar>& p_values, std::size_t m) {
    return bonferroni(std::span<const Scalar>(p_values), m);
}

// "*" p < 0.05, "**" p < 0.01, "***" p < 0.001.
inline std::string stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

struct PairedSample {
    std::vector<std::string> ids;
    Eigen::ArrayXd a;
    Eigen::ArrayXd b;

    void validate() const {
        if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != ids.size())
            throw LengthMismatchError("paired sample columns differ in length");
        if (a.size() < 2) throw DegenerateSampleError("paired sample needs n >= 2");
        if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size())
            throw PairingError("paired sample ids are not unique");
    }
};

inline TestResult paired_t(const PairedSample& s, EffectMode mode = EffectMode::pooled) {
    s.validate();
    return paired_t(s.a, s.b, mode);
}

inline double cohens_d(const PairedSample& s, EffectMode mode = EffectMode::pooled) {
    s.validate();
    return cohens_d(s.a, s.b, mode);
}

} // namespace calmdesk::stats
