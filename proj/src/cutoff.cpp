#include "billiards/cutoff.hpp"

#include "billiards/error.hpp"

#include <algorithm>
#include <cmath>

namespace billiards {

CutoffGeneratingFn::CutoffGeneratingFn(const LazutkinChart& chart, double epsilon)
    : base_(chart), epsilon_(epsilon)
{
    if (!(epsilon > 0.0))
        throw Error(ErrorKind::InvalidInput, "cutoff level must be positive");
    const double lo = 2.0 * std::sqrt(2.0 * epsilon);
    if (!(lo < 1.0))
        throw Error(ErrorKind::InvalidInput, "cutoff level too large for the chart");
    transition_ = {lo, std::sqrt(lo)};
}

GenPartials CutoffGeneratingFn::eval(double x, double X) const
{
    const double d = X - x;
    if (!(d > 0.0))
        throw Error(ErrorKind::CoincidentPoints, "cutoff generating function needs X > x");
    if (d <= transition_.lo)
        return base_.eval(x, X);
    GenPartials cubic = CubicGeneratingFn(1.0).eval(x, X);
    if (d >= transition_.hi)
        return cubic;

    const GenPartials g = base_.eval(x, X);
    const double r = g.value - cubic.value;
    const double r1 = g.d1 - cubic.d1;
    const double r2 = g.d2 - cubic.d2;
    const double r11 = g.d11 - cubic.d11;
    const double r12 = g.d12 - cubic.d12;
    const double r22 = g.d22 - cubic.d22;
    const double tau = transition_.value(d);
    const double tau1 = transition_.derivative(d);
    const double tau2 = transition_.second_derivative(d);

    GenPartials out;
    out.value = cubic.value + r * tau;
    out.d1 = cubic.d1 + r1 * tau - r * tau1;
    out.d2 = cubic.d2 + r2 * tau + r * tau1;
    out.d11 = cubic.d11 + r11 * tau - 2.0 * r1 * tau1 + r * tau2;
    out.d22 = cubic.d22 + r22 * tau + 2.0 * r2 * tau1 + r * tau2;
    out.d12 = cubic.d12 + r12 * tau + (r1 - r2) * tau1 - r * tau2;
    return out;
}

double CutoffGeneratingFn::twist_constant(int nx, int ngap) const
{
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nx; ++i) {
        const double x = static_cast<double>(i) / nx;
        for (int j = 1; j <= ngap; ++j) {
            const double gap = transition_.hi * j / ngap;
            worst = std::min(worst, -eval(x, x + gap).d12 / gap);
        }
    }
    return worst;
}

}  // namespace billiards
