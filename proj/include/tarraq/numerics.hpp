#pragma once

// Numerical building blocks for the analytic model: globally adaptive
// Gauss-Kronrod quadrature with absolute and relative tolerances, elliptic
// integrals and a bracketing root finder (the last two backed by Boost.Math).

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace tarraq::numerics {

class QuadratureError : public std::runtime_error
{
public:
    QuadratureError(const std::string &what, double estimate, double residual)
        : std::runtime_error(what),
          m_estimate(estimate),
          m_residual(residual)
    {
    }

    double estimate() const noexcept { return m_estimate; }
    double residual() const noexcept { return m_residual; }

private:
    double m_estimate;
    double m_residual;
};

struct QuadratureOptions
{
    double abs_tol{1e-9};
    double rel_tol{1e-7};
    std::size_t max_intervals{2000};
};

struct QuadratureResult
{
    double value{0.0};
    double abs_error{0.0};
    std::size_t evaluations{0};
};

namespace detail {

// 15-point Kronrod abscissae (positive half) with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGaussWeights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment
{
    double a;
    double b;
    double value;
    double error;

    bool operator<(const Segment &o) const { return error < o.error; }
};

template <typename F>
Segment gauss_kronrod_15(F &f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::fabs(half);

    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    double resabs = std::fabs(kronrod);
    std::array<double, 7> f1{};
    std::array<double, 7> f2{};

    for (std::size_t j = 0; j < 7; ++j)
    {
        const double dx = half * kKronrodNodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double sum = f1[j] + f2[j];
        kronrod += kKronrodWeights[j] * sum;
        resabs += kKronrodWeights[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
        if (j % 2 == 1)
        {
            gauss += kGaussWeights[j / 2] * sum;
        }
    }

    const double mean = 0.5 * kronrod;
    double resasc = kKronrodWeights[7] * std::fabs(fc - mean);
    for (std::size_t j = 0; j < 7; ++j)
    {
        resasc += kKronrodWeights[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));
    }

    const double value = kronrod * half;
    resabs *= abs_half;
    resasc *= abs_half;
    double error = std::fabs((kronrod - gauss) * half);
    if (resasc != 0.0 && error != 0.0)
    {
        error = resasc * std::fmin(1.0, std::pow(200.0 * error / resasc, 1.5));
    }
    const double round_floor = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
    if (resabs > std::numeric_limits<double>::min() / (50.0 * std::numeric_limits<double>::epsilon()))
    {
        error = std::fmax(round_floor, error);
    }
    return {a, b, value, error};
}

} // namespace detail

/// Globally adaptive G7/K15 quadrature of f over [a, b]. Throws
/// QuadratureError when the tolerance is not met within max_intervals.
template <typename F>
QuadratureResult integrate(F &&f, double a, double b, const QuadratureOptions &opts = {})
{
    if (a == b)
    {
        return {};
    }
    std::priority_queue<detail::Segment> heap;
    auto first = detail::gauss_kronrod_15(f, a, b);
    double total = first.value;
    double total_error = first.error;
    std::size_t evaluations = 15;
    heap.push(first);

    auto tolerance = [&] { return std::fmax(opts.abs_tol, opts.rel_tol * std::fabs(total)); };

    while (total_error > tolerance())
    {
        if (heap.size() >= opts.max_intervals)
        {
            throw QuadratureError("adaptive quadrature did not converge", total, total_error);
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= std::fmin(worst.a, worst.b) || mid >= std::fmax(worst.a, worst.b))
        {
            // Interval cannot be split further in floating point.
            throw QuadratureError("quadrature interval underflow", total, total_error);
        }
        auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        // Re-sum occasionally so the running error does not drift from cancellation.
        if (heap.size() % 64 == 0)
        {
            auto copy = heap;
            total = 0.0;
            total_error = 0.0;
            while (!copy.empty())
            {
                total += copy.top().value;
                total_error += copy.top().error;
                copy.pop();
            }
        }
    }
    return {total, total_error, evaluations};
}

/// Sum of integrals over consecutive pieces of a sorted breakpoint list.
template <typename F>
QuadratureResult integrate_pieces(F &&f, const std::vector<double> &breaks, const QuadratureOptions &opts = {})
{
    QuadratureResult out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    {
        if (breaks[i + 1] <= breaks[i])
        {
            continue;
        }
        auto piece = integrate(f, breaks[i], breaks[i + 1], opts);
        out.value += piece.value;
        out.abs_error += piece.abs_error;
        out.evaluations += piece.evaluations;
    }
    return out;
}

/// Complete elliptic integral of the first kind K(k), modulus k in [0, 1).
double elliptic_k(double k);

/// Complete elliptic integral of the second kind E(k), modulus k in [0, 1].
double elliptic_e(double k);

/// Incomplete elliptic integral of the second kind E(phi, k) for
/// phi in [0, pi/2]. Accepts k > 1 provided k sin(phi) <= 1.
double elliptic_e_incomplete(double phi, double k);

/// Bisection on a bracketing interval [lo, hi] where f(lo) and f(hi) differ in sign.
template <typename F>
double bisect(F &&f, double lo, double hi, double tol, int max_iter = 400)
{
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0)
    {
        return lo;
    }
    if (fhi == 0.0)
    {
        return hi;
    }
    if ((flo > 0.0) == (fhi > 0.0))
    {
        throw std::invalid_argument("bisect: interval does not bracket a root");
    }
    auto done = [tol](double a, double b) { return (b - a) <= tol * std::fmax(1.0, std::fabs(a)); };
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
    const auto [a, b] = boost::math::tools::bisect(f, lo, hi, done, iters);
    return 0.5 * (a + b);
}

} // namespace tarraq::numerics
