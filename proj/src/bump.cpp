#include "billiards/bump.hpp"

#include "billiards/quadrature.hpp"

#include <cmath>

namespace billiards {

const Bump& Bump::instance()
{
    static const Bump bump;
    return bump;
}

Bump::Bump() : norm_(1.0)
{
    norm_ = quad::gauss([this](double s) { return raw(s); }, -1.0, 1.0, 16);
}

double Bump::raw(double s) const
{
    const double q = 1.0 - s * s;
    if (q <= 0.0)
        return 0.0;
    return std::exp(-1.0 / q);
}

double Bump::value(double s) const { return raw(s) / norm_; }

double Bump::derivative(double s) const
{
    const double q = 1.0 - s * s;
    if (q <= 0.0)
        return 0.0;
    return value(s) * (-2.0 * s / (q * q));
}

double Bump::second_derivative(double s) const
{
    const double q = 1.0 - s * s;
    if (q <= 0.0)
        return 0.0;
    const double g = -2.0 * s / (q * q);
    const double dg = (-2.0 * q * q - 8.0 * s * s * q) / (q * q * q * q);
    return value(s) * (g * g + dg);
}

double Bump::step(double z) const
{
    if (z <= 0.0)
        return 0.0;
    if (z >= 1.0)
        return 1.0;
    const double y = 2.0 * z - 1.0;
    // integrate from the nearer end for accuracy near both plateaus
    auto f = [this](double s) { return value(s); };
    if (y <= 0.0)
        return quad::gauss(f, -1.0, y, 1 + static_cast<int>(8.0 * (y + 1.0)));
    return 1.0 - quad::gauss(f, y, 1.0, 1 + static_cast<int>(8.0 * (1.0 - y)));
}

double Transition::value(double t) const
{
    return 1.0 - Bump::instance().step((t - lo) / (hi - lo));
}

double Transition::derivative(double t) const
{
    const double w = hi - lo;
    return -Bump::instance().step_derivative((t - lo) / w) / w;
}

double Transition::second_derivative(double t) const
{
    const double w = hi - lo;
    return -Bump::instance().step_second_derivative((t - lo) / w) / (w * w);
}

}  // namespace billiards
