#include "billiards/modified_map.hpp"

#include "billiards/error.hpp"

#include <cmath>
#include <limits>

namespace billiards {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

LazutkinState shear(double kappa, const LazutkinState& s)
{
    return {s.x + kappa * std::sqrt(2.0 * s.l), s.l};
}

double shear_action(double kappa, double l) { return std::sqrt(2.0) * kappa / 3.0 * l * std::sqrt(l); }

TwistStep cutoff_step(const CutoffGeneratingFn& h, const LazutkinState& s)
{
    TwistStep out;
    if (!(s.l > 0.0))
        throw Error(ErrorKind::InvalidInput, "cutoff map needs l > 0");
    const double guess = std::sqrt(2.0 * s.l);
    if (guess < 0.9 * h.gap_lo()) {
        const LazutkinChart& chart = h.base().chart();
        const LazutkinStep st = lazutkin_step(chart, s);
        if (!st.boundary && st.next.x - s.x <= h.gap_lo()) {
            out.next = st.next;
            out.partials = lazutkin_partials(chart, st.chord);
            out.jac = twist_map_jacobian(out.partials);
            return out;
        }
    }
    // -d1 h(x, X) = l is increasing in X; bracketed Newton
    double lo = 0.0, hi = guess;
    while (-h.eval(s.x, s.x + hi).d1 < s.l)
        hi *= 2.0;
    double gap = guess;
    GenPartials g;
    for (int it = 0; it < 200; ++it) {
        g = h.eval(s.x, s.x + gap);
        const double f = -g.d1 - s.l;
        if (f == 0.0)
            break;
        if (f > 0.0)
            hi = gap;
        else
            lo = gap;
        double next = gap + f / g.d12;
        if (!(next >= lo && next <= hi) || !std::isfinite(next))
            next = 0.5 * (lo + hi);
        const double change = std::abs(next - gap);
        gap = next;
        if (change <= 4.0 * kEps * gap)
            break;
    }
    g = h.eval(s.x, s.x + gap);
    out.next = {s.x + gap, g.d2};
    out.partials = g;
    out.jac = twist_map_jacobian(g);
    return out;
}

ModifiedMap::ModifiedMap(const CutoffGeneratingFn& h, double kappa) : h_(&h), kappa_(kappa)
{
    if (!(kappa >= 0.0 && kappa < 0.5))
        throw Error(ErrorKind::InvalidInput, "shear time must lie in [0, 1/2)");
}

TwistStep ModifiedMap::step(const LazutkinState& s) const
{
    const LazutkinState a = shear(-kappa_, s);
    const TwistStep mid = cutoff_step(*h_, a);
    TwistStep out;
    out.next = shear(-kappa_, mid.next);
    const double sa = -kappa_ / std::sqrt(2.0 * s.l);
    const double sb = -kappa_ / std::sqrt(2.0 * mid.next.l);
    const MapJacobian& j = mid.jac;
    out.jac.xx = j.xx + sb * j.lx;
    out.jac.xl = j.xx * sa + j.xl + sb * (j.lx * sa + j.ll);
    out.jac.lx = j.lx;
    out.jac.ll = j.lx * sa + j.ll;
    out.partials = mid.partials;
    out.partials.value = mid.partials.value - shear_action(kappa_, s.l) - shear_action(kappa_, mid.next.l);
    return out;
}

ModifiedGeneratingFn::Solution ModifiedGeneratingFn::solve(double x, double X) const
{
    const double gap = X - x;
    if (!(gap > 0.0))
        throw Error(ErrorKind::CoincidentPoints, "modified generating function needs X > x");
    // Newton in u = sqrt(2 l); X(u) - x ~ c u
    double u = gap / cubic_scale();
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100; ++it) {
        const TwistStep st = map_->step({x, 0.5 * u * u});
        const double f = st.next.x - X;
        if (f == 0.0)
            return {0.5 * u * u, st};
        if (f > 0.0)
            hi = u;
        else
            lo = u;
        const double slope = st.jac.xl * u;  // dX/du
        double next = u - f / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next))
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * u;
        if (std::abs(next - u) <= 4.0 * kEps * u)
            return {0.5 * u * u, st};
        u = next;
    }
    throw Error(ErrorKind::NoConvergence, "modified generating function: Newton did not converge");
}

double ModifiedGeneratingFn::solve_action(double x, double X) const { return solve(x, X).l; }

GenPartials ModifiedGeneratingFn::eval(double x, double X) const
{
    const Solution sol = solve(x, X);
    const MapJacobian& j = sol.step.jac;
    GenPartials g;
    g.value = sol.step.partials.value;
    g.d1 = -sol.l;
    g.d2 = sol.step.next.l;
    g.d12 = -1.0 / j.xl;
    g.d11 = j.xx / j.xl;
    g.d22 = j.ll / j.xl;
    return g;
}

}  // namespace billiards
