#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "grit/error.hpp"
#include "grit/types.hpp"

namespace grit {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz method.
inline double beta_continued_fraction(double a, double b, double x)
{
    constexpr int max_iterations = 10000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iterations; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) {
            return h;
        }
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
inline double incomplete_beta(double x, double a, double b)
{
    if (!(a > 0.0 && b > 0.0)) {
        throw std::domain_error("incomplete_beta: a and b must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("incomplete_beta: x must lie in [0, 1]");
    }
    if (x == 0.0 || x == 1.0) {
        return x;
    }
    double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(log_front);
    // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of Student's t with `df` degrees of freedom:
/// P(|T| >= |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2).
inline double student_t_two_sided_p(double t, double df)
{
    if (std::isinf(t)) {
        return 0.0;
    }
    double x = df / (df + t * t);
    double p = incomplete_beta(x, df / 2.0, 0.5);
    return std::min(1.0, std::max(0.0, p));
}

struct TTestResult {
    double t_stat = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    double mean_difference = 0.0;
};

/// Paired two-sided t-test on d_i = b_i - a_i.
///
/// Zero-variance conventions: all differences zero gives t = 0, p = 1; a
/// constant non-zero difference gives t = +/-inf, p = 0.
inline TTestResult paired_t_test(std::span<double const> a, std::span<double const> b)
{
    if (a.size() != b.size()) {
        throw MismatchedQuerySets(
            "paired samples differ in size (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    auto const m = a.size();
    if (m < 2) {
        throw TooFewSamples(m);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sum += b[i] - a[i];
    }
    double const mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double dev = (b[i] - a[i]) - mean;
        ss += dev * dev;
    }
    double const sd = std::sqrt(ss / static_cast<double>(m - 1));

    TTestResult r;
    r.df = m - 1;
    r.mean_difference = mean;
    if (sd == 0.0) {
        if (mean == 0.0) {
            r.t_stat = 0.0;
            r.p_value = 1.0;
        } else {
            r.t_stat = mean > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
        return r;
    }
    r.t_stat = mean * std::sqrt(static_cast<double>(m)) / sd;
    r.p_value = student_t_two_sided_p(r.t_stat, static_cast<double>(r.df));
    return r;
}

/// Paired test over per-query values keyed by query id. Both maps must cover
/// exactly the same queries.
inline TTestResult paired_t_test(std::map<QueryId, double> const& a, std::map<QueryId, double> const& b)
{
    if (a.size() != b.size()) {
        throw MismatchedQuerySets("per-query values cover different query sets");
    }
    std::vector<double> va;
    std::vector<double> vb;
    va.reserve(a.size());
    vb.reserve(b.size());
    auto ib = b.begin();
    for (auto const& [qid, value] : a) {
        if (ib->first != qid) {
            throw MismatchedQuerySets("query '" + qid.str() + "' is missing from one side");
        }
        va.push_back(value);
        vb.push_back(ib->second);
        ++ib;
    }
    return paired_t_test(std::span<double const>(va), std::span<double const>(vb));
}

/// Strict `p < 0.05`.
inline bool is_significant(double p_value, double alpha = 0.05) noexcept
{
    return p_value < alpha;
}

}  // namespace grit
