#include "tarraq/numerics.hpp"

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/ellint_2.hpp>
#include <boost/math/special_functions/ellint_rd.hpp>
#include <boost/math/special_functions/ellint_rf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tarraq::numerics {

namespace {

void check_modulus(double k)
{
    if (!(k >= 0.0 && k <= 1.0))
    {
        throw std::domain_error("elliptic modulus outside [0, 1]");
    }
}

} // namespace

double elliptic_k(double k)
{
    check_modulus(k);
    if (k == 1.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    return boost::math::ellint_1(k);
}

double elliptic_e(double k)
{
    check_modulus(k);
    return boost::math::ellint_2(k);
}

double elliptic_e_incomplete(double phi, double k)
{
    if (phi < 0.0 || phi > 0.5 * std::numbers::pi + 1e-15)
    {
        throw std::domain_error("elliptic_e_incomplete: amplitude outside [0, pi/2]");
    }
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    const double q = 1.0 - (k * s) * (k * s);
    if (q < -1e-12)
    {
        throw std::domain_error("elliptic_e_incomplete: k sin(phi) > 1");
    }
    if (s == 0.0)
    {
        return 0.0;
    }
    if (k == 1.0)
    {
        return s;
    }
    // Carlson form, valid for k > 1 as long as k sin(phi) <= 1.
    const double cc = c * c;
    const double qq = std::max(q, 0.0);
    return s * boost::math::ellint_rf(cc, qq, 1.0) - (k * k / 3.0) * s * s * s * boost::math::ellint_rd(cc, qq, 1.0);
}

} // namespace tarraq::numerics
