#pragma once

#include "tarraq/numerics.hpp"

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace tarraq {

/// Parameters of the closed-form topology model.
struct AnalyticScenario
{
    double rho{0.0};
    double R{0.0};
    double v_l{0.0};
    double v_u{0.0};
    double v_c{0.0};
    double L{0.0};

    /// rho = n_nodes / L^3.
    static AnalyticScenario from_box(double n_nodes, double L, double R, double v_l, double v_u, double v_c);

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

/// The closed form has no branch for this parameter region.
class BranchError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

struct DistributionCurve
{
    std::vector<double> t;
    std::vector<double> cdf;
    std::vector<double> pdf;
    double rate_param{0.0};

    double exp_cdf(std::size_t i) const;
    double exp_pdf(std::size_t i) const;
};

struct FitError
{
    double pdf_sup{0.0};
    double cdf_sup{0.0};
    double t_at_pdf_sup{0.0};
};

/// Speed of the other node given the relative speed v and the polar angle of v.
double other_speed(double v, double v_c, double beta_v);

double joint_pdf_rel_velocity(const AnalyticScenario &scn, double v, double beta_v);

/// Velocity windows [lo, hi] in v where the joint density is non-zero, at a given beta_v.
std::vector<std::pair<double, double>> velocity_windows(const AnalyticScenario &scn, double beta_v);

/// E[phi(v)] under the relative-speed law, by nested adaptive quadrature.
/// Optional kink(v) location for the inner integrand (ignored when <= 0).
double rel_speed_expectation(const AnalyticScenario &scn,
                             const std::function<double(double)> &phi,
                             double kink = 0.0,
                             const numerics::QuadratureOptions &opts = {});

double arrival_rate_quadrature(const AnalyticScenario &scn, const numerics::QuadratureOptions &opts = {});

/// Elliptic-integral form. Throws BranchError for v_c < v_l or v_c == 0.
double arrival_rate_closed_form(const AnalyticScenario &scn);

double change_rate(const AnalyticScenario &scn, const numerics::QuadratureOptions &opts = {});

/// 200-point log grid from 0.01/rate to 8/rate.
std::vector<double> default_grid(double rate, std::size_t n = 200);

std::vector<double> linear_grid(double t_max, std::size_t n);

DistributionCurve nit_distribution(const AnalyticScenario &scn, const std::vector<double> &grid);

DistributionCurve ncit_distribution(const AnalyticScenario &scn, const std::vector<double> &grid);

/// Sup-norm distance between the curve and its exponential surrogate, over the curve's grid.
FitError fit_error(const DistributionCurve &curve);

/// Trapezoid integral of the pdf column.
double pdf_mass(const DistributionCurve &curve);

void write_curve_csv(std::ostream &os, const DistributionCurve &curve);

} // namespace tarraq
