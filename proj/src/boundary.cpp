#include "billiards/boundary.hpp"

#include "billiards/error.hpp"
#include "billiards/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace billiards {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kConvexityGrid = 8192;
}  // namespace

int RadiusProfile::max_frequency() const
{
    return static_cast<int>(std::max(cos.size(), sin.size())) - 1;
}

double RadiusProfile::coefficient_cos(int k) const
{
    return k < static_cast<int>(cos.size()) ? cos[k] : 0.0;
}

double RadiusProfile::coefficient_sin(int k) const
{
    return k < static_cast<int>(sin.size()) ? sin[k] : 0.0;
}

double RadiusProfile::value(double psi) const { return derivative(psi, 0); }

double RadiusProfile::derivative(double psi, int n) const
{
    double out = n == 0 ? coefficient_cos(0) : 0.0;
    const int kmax = max_frequency();
    for (int k = 2; k <= kmax; ++k) {
        const double a = coefficient_cos(k);
        const double b = coefficient_sin(k);
        if (a == 0.0 && b == 0.0)
            continue;
        const double c = std::cos(k * psi);
        const double s = std::sin(k * psi);
        const double kk = static_cast<double>(k);
        switch (n) {
        case 0: out += a * c + b * s; break;
        case 1: out += kk * (-a * s + b * c); break;
        default: out += -kk * kk * (a * c + b * s); break;
        }
    }
    return out;
}

void RadiusProfile::validate() const
{
    if (cos.empty())
        throw Error(ErrorKind::InvalidInput, "radius profile needs a frequency-0 cosine coefficient");
    for (double c : cos)
        if (!std::isfinite(c))
            throw Error(ErrorKind::InvalidInput, "non-finite profile coefficient");
    for (double c : sin)
        if (!std::isfinite(c))
            throw Error(ErrorKind::InvalidInput, "non-finite profile coefficient");
    if (coefficient_sin(0) != 0.0)
        throw Error(ErrorKind::InvalidInput, "sin[0] has no meaning and must be zero");
    if (coefficient_cos(1) != 0.0 || coefficient_sin(1) != 0.0)
        throw Error(ErrorKind::ClosureViolation, "frequency-1 coefficients must be zero");
    double lowest = coefficient_cos(0);
    for (int j = 0; j < kConvexityGrid; ++j)
        lowest = std::min(lowest, value(kTwoPi * j / kConvexityGrid));
    if (!(lowest > 0.0))
        throw Error(ErrorKind::NonConvex,
                    "radius of curvature reaches " + std::to_string(lowest) + " <= 0");
}

RadiusProfile RadiusProfile::from_samples(const std::vector<double>& samples, int max_frequency)
{
    const int n = static_cast<int>(samples.size());
    RadiusProfile out;
    out.cos.assign(max_frequency + 1, 0.0);
    out.sin.assign(max_frequency + 1, 0.0);
    for (int k = 0; k <= max_frequency && 2 * k < n; ++k) {
        if (k == 1)
            continue;
        double a = 0.0;
        double b = 0.0;
        for (int j = 0; j < n; ++j) {
            const double psi = kTwoPi * j / n;
            a += samples[j] * std::cos(k * psi);
            b += samples[j] * std::sin(k * psi);
        }
        out.cos[k] = (k == 0 ? 1.0 : 2.0) * a / n;
        out.sin[k] = k == 0 ? 0.0 : 2.0 * b / n;
    }
    return out;
}

BoundaryCurve::BoundaryCurve(RadiusProfile profile) : profile_(std::move(profile))
{
    profile_.validate();
    // perimeter = integral of r over one turn = 2 pi a0
    scale_ = 1.0 / (kTwoPi * profile_.coefficient_cos(0));

    // r cos(psi) and r sin(psi) as sums c cos(m psi) + d sin(m psi), m >= 1.
    const double a0 = profile_.coefficient_cos(0);
    x_terms_.push_back({1, a0, 0.0});
    y_terms_.push_back({1, 0.0, a0});
    for (int k = 2; k <= profile_.max_frequency(); ++k) {
        const double a = profile_.coefficient_cos(k);
        const double b = profile_.coefficient_sin(k);
        if (a == 0.0 && b == 0.0)
            continue;
        x_terms_.push_back({k + 1, 0.5 * a, 0.5 * b});
        x_terms_.push_back({k - 1, 0.5 * a, 0.5 * b});
        y_terms_.push_back({k + 1, -0.5 * b, 0.5 * a});
        y_terms_.push_back({k - 1, 0.5 * b, -0.5 * a});
    }

    for (const Term& t : x_terms_)
        center_[0] += scale_ * t.d / t.m;
    for (const Term& t : y_terms_)
        center_[1] += scale_ * t.d / t.m;

    double lowest = radius_at_psi(0.0);
    for (int j = 0; j < kConvexityGrid; ++j)
        lowest = std::min(lowest, radius_at_psi(kTwoPi * j / kConvexityGrid));
    min_radius_ = lowest;
}

double BoundaryCurve::arclength_at_psi(double psi) const
{
    double acc = profile_.coefficient_cos(0) * psi;
    for (int k = 2; k <= profile_.max_frequency(); ++k) {
        const double a = profile_.coefficient_cos(k);
        const double b = profile_.coefficient_sin(k);
        if (a == 0.0 && b == 0.0)
            continue;
        acc += (a * std::sin(k * psi) + b * (1.0 - std::cos(k * psi))) / k;
    }
    return scale_ * acc;
}

double BoundaryCurve::arc_between(double psi0, double delta) const
{
    // sin(k(p+d)) - sin(kp) = 2 cos(k(p+d/2)) sin(kd/2), cos difference likewise,
    // so short arcs keep full relative precision.
    double acc = profile_.coefficient_cos(0) * delta;
    const double mid = psi0 + 0.5 * delta;
    for (int k = 2; k <= profile_.max_frequency(); ++k) {
        const double a = profile_.coefficient_cos(k);
        const double b = profile_.coefficient_sin(k);
        if (a == 0.0 && b == 0.0)
            continue;
        const double h = std::sin(0.5 * k * delta);
        acc += (a * 2.0 * std::cos(k * mid) * h + b * 2.0 * std::sin(k * mid) * h) / k;
    }
    return scale_ * acc;
}

Vec2 BoundaryCurve::point_at_psi(double psi) const
{
    auto integrate = [psi](const std::vector<Term>& terms) {
        double acc = 0.0;
        for (const Term& t : terms) {
            if (t.m == 0) {
                acc += t.c * psi;
                continue;
            }
            acc += (t.c * std::sin(t.m * psi) + t.d * (1.0 - std::cos(t.m * psi))) / t.m;
        }
        return acc;
    };
    return {scale_ * integrate(x_terms_) - center_[0], scale_ * integrate(y_terms_) - center_[1]};
}

int BoundaryCurve::panel_count(double delta) const
{
    const double width = std::min(0.5, 1.5 / (profile_.max_frequency() + 2));
    return std::max(1, static_cast<int>(std::ceil(std::abs(delta) / width)));
}

BoundaryCurve::ChordFrame BoundaryCurve::chord_in_tangent_frame(double psi0, double delta) const
{
    const int panels = panel_count(delta);
    const quad::GaussRule& rule = quad::gauss_rule();
    const double width = delta / panels;
    double tangential = 0.0;
    double normal = 0.0;
    double deficit = 0.0;  // integral of r (1 - cos u)
    for (int p = 0; p < panels; ++p) {
        const double half = 0.5 * width;
        const double mid = p * width + half;
        for (std::size_t i = 0; i < quad::GaussRule::kNodes; ++i) {
            const double u = mid + half * rule.nodes[i];
            const double w = half * rule.weights[i] * profile_.value(psi0 + u);
            const double sh = std::sin(0.5 * u);
            tangential += w * std::cos(u);
            normal += w * std::sin(u);
            deficit += w * 2.0 * sh * sh;
        }
    }
    ChordFrame out;
    out.tangential = scale_ * tangential;
    out.normal = scale_ * normal;
    out.arc = arc_between(psi0, delta);
    const double chord = std::hypot(out.tangential, out.normal);
    // arc - chord = (arc - tangential) - (chord - tangential)
    out.excess = out.tangential > 0.0
                     ? scale_ * deficit - out.normal * out.normal / (chord + out.tangential)
                     : out.arc - chord;
    return out;
}

double BoundaryCurve::tangent_angle(double s) const
{
    const double turns = std::floor(s);
    const double frac = s - turns;
    // s(psi) - frac is increasing on [0, 2 pi] with s' = r_hat > 0.
    double lo = 0.0;
    double hi = kTwoPi;
    double psi = kTwoPi * frac;
    for (int it = 0; it < 100; ++it) {
        const double f = arclength_at_psi(psi) - frac;
        if (f == 0.0)
            break;
        if (f > 0.0)
            hi = psi;
        else
            lo = psi;
        const double step = f / radius_at_psi(psi);
        double next = psi - step;
        if (!(next >= lo && next <= hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - psi) <= 1e-15 * std::max(1.0, std::abs(psi))) {
            psi = next;
            break;
        }
        psi = next;
    }
    return psi + kTwoPi * turns;
}

Vec2 BoundaryCurve::point(double s) const { return point_at_psi(tangent_angle(s)); }

double BoundaryCurve::radius_of_curvature(double s) const { return radius_at_psi(tangent_angle(s)); }

double BoundaryCurve::radius_ds(double s) const
{
    const double psi = tangent_angle(s);
    return radius_derivative_psi(psi, 1) / radius_at_psi(psi);
}

double BoundaryCurve::radius_dss(double s) const
{
    const double psi = tangent_angle(s);
    const double r = radius_at_psi(psi);
    const double r1 = radius_derivative_psi(psi, 1);
    const double r2 = radius_derivative_psi(psi, 2);
    return (r2 * r - r1 * r1) / (r * r * r);
}

BoundaryCurve build_curve(const RadiusProfile& profile) { return BoundaryCurve(profile); }

}  // namespace billiards
