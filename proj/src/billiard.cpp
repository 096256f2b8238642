#include "billiards/billiard.hpp"

#include "billiards/error.hpp"

#include <cmath>
#include <numbers>

namespace billiards {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

ChordData chord_from_psi(const BoundaryCurve& curve, double psi0, double delta)
{
    const auto frame = curve.chord_in_tangent_frame(psi0, delta);
    ChordData c;
    c.psi = psi0;
    c.delta_psi = delta;
    c.s = curve.arclength_at_psi(psi0);
    c.s_next = c.s + frame.arc;
    c.length = std::hypot(frame.tangential, frame.normal);
    c.v = std::atan2(frame.normal, frame.tangential);
    c.v_next = delta - c.v;
    c.rho = curve.radius_at_psi(psi0);
    c.rho_next = curve.radius_at_psi(psi0 + delta);
    c.excess = frame.excess;
    c.h = -c.length;
    c.d1 = std::cos(c.v);
    c.d2 = -std::cos(c.v_next);
    const double sv = std::sin(c.v);
    const double sn = std::sin(c.v_next);
    c.d12 = -sv * sn / c.length;
    c.d11 = -sv * sv / c.length + sv / c.rho;
    c.d22 = -sn * sn / c.length + sn / c.rho_next;
    return c;
}

ChordData reflect_from_psi(const BoundaryCurve& curve, double psi0, double v, const ReflectOptions& opts)
{
    if (!(v >= opts.v_min && v <= kPi - opts.v_min))
        throw Error(ErrorKind::DegenerateTangency,
                    "reflection angle " + std::to_string(v) + " outside [v_min, pi - v_min]");
    // Chord angle as a function of delta increases from 0 to pi on (0, 2 pi);
    // d(angle)/d(delta) = r(psi0 + delta) sin(v+) / length.
    double lo = 0.0;
    double hi = kTwoPi;
    double delta = std::min(2.0 * v, kPi);
    for (int it = 0; it < 200; ++it) {
        const auto frame = curve.chord_in_tangent_frame(psi0, delta);
        const double angle = std::atan2(frame.normal, frame.tangential);
        const double f = angle - v;
        if (f == 0.0)
            break;
        if (f > 0.0)
            hi = delta;
        else
            lo = delta;
        const double length = std::hypot(frame.tangential, frame.normal);
        const double slope = curve.radius_at_psi(psi0 + delta) * std::sin(delta - angle) / length;
        double next = delta - f / slope;
        if (!(next >= lo && next <= hi) || !std::isfinite(next))
            next = 0.5 * (lo + hi);
        const double change = std::abs(next - delta);
        delta = next;
        if (change <= 1e-15 * delta)
            break;
        if (hi - lo <= 1e-15 * delta) {
            delta = 0.5 * (lo + hi);
            break;
        }
    }
    if (!(delta > 0.0 && delta < kTwoPi))
        throw Error(ErrorKind::DegenerateTangency, "root bracket collapsed");
    return chord_from_psi(curve, psi0, delta);
}

BilliardState reflect(const BoundaryCurve& curve, const BilliardState& state, const ReflectOptions& opts)
{
    const double psi0 = curve.tangent_angle(state.s);
    const ChordData c = reflect_from_psi(curve, psi0, state.v, opts);
    return {state.s + (c.s_next - c.s), c.v_next};
}

ChordData generating_h(const BoundaryCurve& curve, double s, double s_next)
{
    double gap = s_next - s;
    gap -= std::floor(gap);
    if (gap < 1e-12 || gap > 1.0 - 1e-12)
        throw Error(ErrorKind::CoincidentPoints, "chord endpoints coincide modulo 1");
    const double psi0 = curve.tangent_angle(s);
    // solve arc(psi0, delta) = gap; arc is increasing with slope r_hat
    double lo = 0.0;
    double hi = kTwoPi;
    double delta = kTwoPi * gap;
    for (int it = 0; it < 200; ++it) {
        const double f = curve.arc_between(psi0, delta) - gap;
        if (f == 0.0)
            break;
        if (f > 0.0)
            hi = delta;
        else
            lo = delta;
        double next = delta - f / curve.radius_at_psi(psi0 + delta);
        if (!(next >= lo && next <= hi))
            next = 0.5 * (lo + hi);
        const double change = std::abs(next - delta);
        delta = next;
        if (change <= 1e-15 * delta)
            break;
    }
    ChordData c = chord_from_psi(curve, psi0, delta);
    // report the caller's lift
    c.s = s;
    c.s_next = s + gap;
    return c;
}

std::vector<BilliardState> orbit(const BoundaryCurve& curve, const BilliardState& state, int n,
                                 const ReflectOptions& opts)
{
    std::vector<BilliardState> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(state);
    for (int i = 0; i < n; ++i)
        out.push_back(reflect(curve, out.back(), opts));
    return out;
}

}  // namespace billiards
