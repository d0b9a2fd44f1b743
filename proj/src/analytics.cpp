#include "tarraq/analytics.hpp"

#include "tarraq/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace tarraq {

namespace {

using numerics::integrate;
using numerics::QuadratureOptions;

constexpr double kPi = std::numbers::pi;

// Breakpoints of the outer beta integral where the window structure changes.
std::vector<double> beta_breaks(const AnalyticScenario &scn)
{
    std::vector<double> b{0.0, 0.5 * kPi, kPi};
    if (scn.v_c > 0.0 && scn.v_c > scn.v_l)
    {
        b.push_back(kPi - std::asin(scn.v_l / scn.v_c));
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

} // namespace

AnalyticScenario AnalyticScenario::from_box(double n_nodes, double L, double R, double v_l, double v_u, double v_c)
{
    AnalyticScenario s;
    s.rho = n_nodes / (L * L * L);
    s.R = R;
    s.v_l = v_l;
    s.v_u = v_u;
    s.v_c = v_c;
    s.L = L;
    return s;
}

void AnalyticScenario::validate() const
{
    if (!(rho > 0.0) || !std::isfinite(rho))
    {
        throw std::invalid_argument("scenario: rho must be positive");
    }
    if (!(v_l >= 0.0 && v_l < v_u))
    {
        throw std::invalid_argument("scenario: need 0 <= v_l < v_u");
    }
    if (!(v_c >= 0.0 && v_c <= v_u))
    {
        throw std::invalid_argument("scenario: need 0 <= v_c <= v_u");
    }
    if (!(R > 0.0))
    {
        throw std::invalid_argument("scenario: R must be positive");
    }
    if (L > 0.0 && R >= std::sqrt(3.0) * L)
    {
        throw std::invalid_argument("scenario: R must be below sqrt(3) L");
    }
}

double DistributionCurve::exp_cdf(std::size_t i) const
{
    return -std::expm1(-rate_param * t.at(i));
}

double DistributionCurve::exp_pdf(std::size_t i) const
{
    return rate_param * std::exp(-rate_param * t.at(i));
}

double other_speed(double v, double v_c, double beta_v)
{
    const double h2 = v * v + v_c * v_c + 2.0 * v * v_c * std::cos(beta_v);
    return std::sqrt(std::max(h2, 0.0));
}

double joint_pdf_rel_velocity(const AnalyticScenario &scn, double v, double beta_v)
{
    if (v < 0.0)
    {
        return 0.0;
    }
    const double h = other_speed(v, scn.v_c, beta_v);
    if (h < scn.v_l || h > scn.v_u || h == 0.0)
    {
        return 0.0;
    }
    return v / h / (4.0 * kPi * kPi * (scn.v_u - scn.v_l));
}

std::vector<std::pair<double, double>> velocity_windows(const AnalyticScenario &scn, double beta_v)
{
    const double vc = scn.v_c;
    const double sb = std::sin(beta_v);
    const double cb = std::cos(beta_v);
    const double p = vc * cb;
    const double s = vc * sb;
    const double r_u = std::sqrt(std::max(scn.v_u * scn.v_u - s * s, 0.0));
    const double vmax = std::max(-p + r_u, 0.0);
    std::vector<std::pair<double, double>> w;
    if (s > scn.v_l)
    {
        w.emplace_back(0.0, vmax);
        return w;
    }
    const double r_l = std::sqrt(std::max(scn.v_l * scn.v_l - s * s, 0.0));
    if (vc < scn.v_l)
    {
        w.emplace_back(std::max(-p + r_l, 0.0), vmax);
    }
    else if (cb >= 0.0)
    {
        w.emplace_back(0.0, vmax);
    }
    else
    {
        w.emplace_back(0.0, std::max(-p - r_l, 0.0));
        w.emplace_back(std::max(-p + r_l, 0.0), vmax);
    }
    std::erase_if(w, [](const auto &iv) { return !(iv.second > iv.first); });
    return w;
}

double rel_speed_expectation(const AnalyticScenario &scn,
                             const std::function<double(double)> &phi,
                             double kink,
                             const QuadratureOptions &opts)
{
    const double vc = scn.v_c;
    auto inner = [&](double beta) {
        const double cb = std::cos(beta);
        auto integrand = [&](double v) {
            const double h = std::sqrt(std::max(v * v + vc * vc + 2.0 * v * vc * cb, 0.0));
            return h > 0.0 ? phi(v) * v / h : 0.0;
        };
        double sum = 0.0;
        for (const auto &[lo, hi] : velocity_windows(scn, beta))
        {
            if (kink > lo && kink < hi)
            {
                sum += integrate(integrand, lo, kink, opts).value;
                sum += integrate(integrand, kink, hi, opts).value;
            }
            else
            {
                sum += integrate(integrand, lo, hi, opts).value;
            }
        }
        return sum;
    };
    const auto outer = numerics::integrate_pieces(inner, beta_breaks(scn), opts);
    return outer.value / (kPi * (scn.v_u - scn.v_l));
}

double arrival_rate_quadrature(const AnalyticScenario &scn, const QuadratureOptions &opts)
{
    scn.validate();
    const double ev = rel_speed_expectation(scn, [](double v) { return v; }, 0.0, opts);
    return scn.rho * kPi * scn.R * scn.R * ev;
}

double arrival_rate_closed_form(const AnalyticScenario &scn)
{
    scn.validate();
    const double vc = scn.v_c;
    const double vl = scn.v_l;
    const double vu = scn.v_u;
    if (vc <= 0.0)
    {
        throw BranchError("closed form requires v_c > 0");
    }
    if (vc < vl)
    {
        throw BranchError("closed form undefined for v_c < v_l; use the quadrature form");
    }
    QuadratureOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-11;
    opts.max_intervals = 4000;

    auto weight = [vc](double beta) {
        const double c = std::cos(beta);
        return 0.5 * (3.0 * vc * vc * c * c - vc * vc);
    };

    double S = vu * vu * numerics::elliptic_e(vc / vu);
    S += integrate(
             [&](double beta) {
                 const double s = vc * std::sin(beta);
                 return weight(beta) * std::log(vu + std::sqrt(std::max(vu * vu - s * s, 0.0)));
             },
             0.0, kPi, opts)
             .value;

    // Contribution of the v = 0 end of the window.
    S -= integrate(
             [&](double beta) {
                 const double ch = std::cos(0.5 * beta);
                 return weight(beta) * std::log(2.0 * vc * ch * ch);
             },
             0.0, kPi, opts)
             .value;

    // Contribution of the gap between the two windows beyond beta_0.
    const double beta0 = kPi - std::asin(vl / vc);
    S -= vl * vl * numerics::elliptic_e_incomplete(std::asin(vl / vc), vc / vl);
    S -= integrate(
             [&](double beta) {
                 const double s = vc * std::sin(beta);
                 const double r_l = std::sqrt(std::max(vl * vl - s * s, 0.0));
                 return 2.0 * weight(beta) * std::log((vl + r_l) / s);
             },
             beta0, kPi, opts)
             .value;

    return scn.rho * scn.R * scn.R / (vu - vl) * S;
}

double change_rate(const AnalyticScenario &scn, const QuadratureOptions &opts)
{
    return 2.0 * arrival_rate_quadrature(scn, opts);
}

std::vector<double> default_grid(double rate, std::size_t n)
{
    if (!(rate > 0.0) || n < 2)
    {
        throw std::invalid_argument("default_grid: need rate > 0 and n >= 2");
    }
    const double lo = std::log(0.01 / rate);
    const double hi = std::log(8.0 / rate);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        g[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return g;
}

std::vector<double> linear_grid(double t_max, std::size_t n)
{
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        g[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

DistributionCurve nit_distribution(const AnalyticScenario &scn, const std::vector<double> &grid)
{
    scn.validate();
    if (!std::is_sorted(grid.begin(), grid.end()) || (!grid.empty() && grid.front() < 0.0))
    {
        throw std::invalid_argument("nit_distribution: grid must be sorted and non-negative");
    }
    const double k = scn.rho * kPi * scn.R * scn.R;
    DistributionCurve c;
    c.t = grid;
    c.rate_param = arrival_rate_quadrature(scn);
    for (double t : grid)
    {
        const double surv = rel_speed_expectation(scn, [&](double v) { return std::exp(-k * v * t); });
        const double pdf = rel_speed_expectation(scn, [&](double v) { return k * v * std::exp(-k * v * t); });
        c.cdf.push_back(std::clamp(1.0 - surv, 0.0, 1.0));
        c.pdf.push_back(std::max(pdf, 0.0));
    }
    return c;
}

DistributionCurve ncit_distribution(const AnalyticScenario &scn, const std::vector<double> &grid)
{
    scn.validate();
    if (!std::is_sorted(grid.begin(), grid.end()) || (!grid.empty() && grid.front() < 0.0))
    {
        throw std::invalid_argument("ncit_distribution: grid must be sorted and non-negative");
    }
    const double R = scn.R;
    const double rho = scn.rho;
    DistributionCurve c;
    c.t = grid;
    c.rate_param = change_rate(scn);
    for (double t : grid)
    {
        const double kink = t > 0.0 ? 2.0 * R / t : 0.0;
        const double surv = rel_speed_expectation(
            scn, [&](double v) { return std::exp(-rho * swept_volume(v, t, R)); }, kink);
        const double pdf = rel_speed_expectation(
            scn,
            [&](double v) {
                const double vt = v * t;
                const double fac = vt > 2.0 * R ? 1.0 : 2.0 - vt * vt / (4.0 * R * R);
                return rho * kPi * R * R * v * fac * std::exp(-rho * swept_volume(v, t, R));
            },
            kink);
        c.cdf.push_back(std::clamp(1.0 - surv, 0.0, 1.0));
        c.pdf.push_back(std::max(pdf, 0.0));
    }
    return c;
}

FitError fit_error(const DistributionCurve &curve)
{
    FitError e;
    for (std::size_t i = 0; i < curve.t.size(); ++i)
    {
        const double dp = std::fabs(curve.pdf[i] - curve.exp_pdf(i));
        if (dp > e.pdf_sup)
        {
            e.pdf_sup = dp;
            e.t_at_pdf_sup = curve.t[i];
        }
        e.cdf_sup = std::max(e.cdf_sup, std::fabs(curve.cdf[i] - curve.exp_cdf(i)));
    }
    return e;
}

double pdf_mass(const DistributionCurve &curve)
{
    double m = 0.0;
    for (std::size_t i = 1; i < curve.t.size(); ++i)
    {
        m += 0.5 * (curve.pdf[i] + curve.pdf[i - 1]) * (curve.t[i] - curve.t[i - 1]);
    }
    return m;
}

void write_curve_csv(std::ostream &os, const DistributionCurve &curve)
{
    os << "t,cdf,pdf,exp_cdf,exp_pdf\n";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < curve.t.size(); ++i)
    {
        os << curve.t[i] << ',' << curve.cdf[i] << ',' << curve.pdf[i] << ',' << curve.exp_cdf(i) << ','
           << curve.exp_pdf(i) << '\n';
    }
}

} // namespace tarraq
