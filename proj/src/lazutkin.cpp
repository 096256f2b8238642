#include "billiards/lazutkin.hpp"

#include "billiards/error.hpp"
#include "billiards/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace billiards {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y, double floor, int min_points)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (!(std::abs(y[i]) > floor) || !(x[i] > 0.0))
            continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < min_points)
        throw Error(ErrorKind::FitUnstable,
                    "only " + std::to_string(n) + " residuals above the floating-point floor");
    PowerFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.used = n;
    return fit;
}

LazutkinChart::LazutkinChart(BoundaryCurve curve, int panels)
    : curve_(std::move(curve)), panels_(panels), width_(kTwoPi / panels)
{
    cumulative_.assign(static_cast<std::size_t>(panels_) + 1, 0.0);
    for (int j = 0; j < panels_; ++j)
        cumulative_[j + 1] = cumulative_[j] + quad::gauss([this](double psi) { return cbrt_radius(psi); },
                                                          j * width_, (j + 1) * width_);
    c1_ = 1.0 / cumulative_.back();
}

double LazutkinChart::cbrt_radius(double psi) const { return std::cbrt(curve_.radius_at_psi(psi)); }

double LazutkinChart::x_of_psi(double psi) const
{
    const double turns = std::floor(psi / kTwoPi);
    const double rem = psi - kTwoPi * turns;
    const int j = std::clamp(static_cast<int>(rem / width_), 0, panels_ - 1);
    const double part = quad::gauss([this](double p) { return cbrt_radius(p); }, j * width_, rem);
    return c1_ * (cumulative_[j] + part) + turns;
}

double LazutkinChart::psi_of_x(double x) const
{
    const double turns = std::floor(x);
    const double frac = x - turns;
    double lo = 0.0;
    double hi = kTwoPi;
    double psi = kTwoPi * frac;
    for (int it = 0; it < 100; ++it) {
        const double f = x_of_psi(psi) - frac;
        if (f == 0.0)
            break;
        if (f > 0.0)
            hi = psi;
        else
            lo = psi;
        double next = psi - f / (c1_ * cbrt_radius(psi));
        if (!(next >= lo && next <= hi))
            next = 0.5 * (lo + hi);
        const double change = std::abs(next - psi);
        psi = next;
        if (change <= 1e-15 * std::max(1.0, psi))
            break;
    }
    return psi + kTwoPi * turns;
}

double LazutkinChart::x_increment(double psi0, double delta) const
{
    if (std::abs(delta) > 0.5)
        return x_of_psi(psi0 + delta) - x_of_psi(psi0);
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(delta) * (curve_.profile().max_frequency() + 2) / 1.5)));
    return c1_ * quad::gauss([&](double p) { return cbrt_radius(p); }, psi0, psi0 + delta, panels);
}

double LazutkinChart::delta_for_x_gap(double psi0, double gap) const
{
    double lo = 0.0;
    double hi = kTwoPi * std::ceil(gap + 1e-300);
    double delta = std::min(kTwoPi * gap, hi);
    for (int it = 0; it < 200; ++it) {
        const double f = x_increment(psi0, delta) - gap;
        if (f == 0.0)
            break;
        if (f > 0.0)
            hi = delta;
        else
            lo = delta;
        double next = delta - f / (c1_ * cbrt_radius(psi0 + delta));
        if (!(next >= lo && next <= hi))
            next = 0.5 * (lo + hi);
        const double change = std::abs(next - delta);
        delta = next;
        if (change <= 1e-15 * delta)
            break;
    }
    return delta;
}

double LazutkinChart::ds_dx(double psi) const
{
    const double rho = curve_.radius_at_psi(psi);
    return std::cbrt(rho * rho) / c1_;
}

double LazutkinChart::d2s_dx2(double psi) const
{
    const double rho = curve_.radius_at_psi(psi);
    const double rho_s = curve_.radius_derivative_psi(psi, 1) / rho;
    return (2.0 / 3.0) * std::cbrt(rho) * rho_s / (c1_ * c1_);
}

double LazutkinChart::l_of(double rho, double v) const
{
    const double sh = std::sin(0.5 * v);
    return 8.0 * c1_ * c1_ * std::cbrt(rho * rho) * sh * sh;
}

LazutkinState LazutkinChart::to_lazutkin(const BilliardState& state) const
{
    const double psi = curve_.tangent_angle(state.s);
    return {x_of_psi(psi), l_of(curve_.radius_at_psi(psi), state.v)};
}

BilliardState LazutkinChart::from_lazutkin(const LazutkinState& state) const
{
    if (state.l < 0.0)
        throw Error(ErrorKind::InvalidInput, "negative Lazutkin action");
    const double psi = psi_of_x(state.x);
    const double rho = curve_.radius_at_psi(psi);
    const double half_sin = std::sqrt(2.0 * state.l) / (4.0 * c1_ * std::cbrt(rho));
    if (half_sin > 1.0)
        throw Error(ErrorKind::InvalidInput, "Lazutkin action beyond the chart");
    return {curve_.arclength_at_psi(psi), 2.0 * std::asin(half_sin)};
}

double LazutkinChart::table_checksum() const
{
    double acc = 0.0;
    for (double c : cumulative_)
        acc += c * c;
    return acc;
}

LazutkinStep lazutkin_step(const LazutkinChart& chart, const LazutkinState& state, const ReflectOptions& opts)
{
    LazutkinStep step;
    if (state.l < kLazutkinMinAction) {
        step.next = {state.x, 0.0};
        step.boundary = true;
        return step;
    }
    const BoundaryCurve& curve = chart.curve();
    const double psi = chart.psi_of_x(state.x);
    const double rho = curve.radius_at_psi(psi);
    const double half_sin = std::sqrt(2.0 * state.l) / (4.0 * chart.c1() * std::cbrt(rho));
    if (half_sin > 1.0)
        throw Error(ErrorKind::InvalidInput, "Lazutkin action beyond the chart");
    const double v = 2.0 * std::asin(half_sin);
    step.chord = reflect_from_psi(curve, psi, v, opts);
    step.next.x = state.x + chart.x_increment(psi, step.chord.delta_psi);
    step.next.l = chart.l_of(step.chord.rho_next, step.chord.v_next);
    return step;
}

LazutkinState lazutkin_map(const LazutkinChart& chart, const LazutkinState& state, const ReflectOptions& opts)
{
    return lazutkin_step(chart, state, opts).next;
}

GenPartials lazutkin_partials(const LazutkinChart& chart, const ChordData& c)
{
    const double c1 = chart.c1();
    const double k = 4.0 * c1 * c1 * c1;
    const double psi1 = c.psi + c.delta_psi;
    const double sig0 = chart.ds_dx(c.psi);
    const double sig1 = chart.ds_dx(psi1);
    const double dsig0 = chart.d2s_dx2(c.psi);
    const double dsig1 = chart.d2s_dx2(psi1);
    const double h0 = std::sin(0.5 * c.v);
    const double h1 = std::sin(0.5 * c.v_next);
    const double d1_minus_one = -2.0 * h0 * h0;  // cos v - 1
    const double d2_plus_one = 2.0 * h1 * h1;    // 1 - cos v+
    GenPartials g;
    g.value = k * c.excess;
    g.d1 = k * d1_minus_one * sig0;
    g.d2 = k * d2_plus_one * sig1;
    g.d12 = k * c.d12 * sig0 * sig1;
    g.d11 = k * (c.d11 * sig0 * sig0 + d1_minus_one * dsig0);
    g.d22 = k * (c.d22 * sig1 * sig1 + d2_plus_one * dsig1);
    return g;
}

GenPartials LazutkinGeneratingFn::eval(double x, double X) const
{
    const double gap = X - x;
    if (!(gap > 1e-15))
        throw Error(ErrorKind::CoincidentPoints, "Lazutkin generating function needs X > x");
    if (gap >= 1.0)
        throw Error(ErrorKind::InvalidInput, "Lazutkin generating function needs X - x < 1");
    const double psi0 = chart_->psi_of_x(x);
    const double delta = chart_->delta_for_x_gap(psi0, gap);
    return lazutkin_partials(*chart_, chord_from_psi(chart_->curve(), psi0, delta));
}

MapJacobian twist_map_jacobian(const GenPartials& g)
{
    MapJacobian j;
    j.xl = -1.0 / g.d12;
    j.xx = -g.d11 / g.d12;
    j.lx = g.d12 + g.d22 * j.xx;
    j.ll = g.d22 * j.xl;
    return j;
}

ExpansionCoeffs expansion_coeffs(const BoundaryCurve& curve, double s)
{
    const double rho = curve.radius_of_curvature(s);
    const double r1 = curve.radius_ds(s);
    const double r2 = curve.radius_dss(s);
    ExpansionCoeffs e;
    e.alpha1 = 2.0 * rho;
    e.alpha2 = (4.0 / 3.0) * rho * r1;
    e.alpha3 = (2.0 / 3.0) * rho * rho * r2 + (4.0 / 9.0) * rho * r1 * r1;
    e.beta2 = -(2.0 / 3.0) * r1;
    e.beta3 = -(2.0 / 3.0) * rho * r2 + (4.0 / 9.0) * r1 * r1;
    return e;
}

ExpansionReport verify_expansion_order(const BoundaryCurve& curve, double s, const std::vector<double>& v_seq)
{
    const ExpansionCoeffs e = expansion_coeffs(curve, s);
    const double psi = curve.tangent_angle(s);
    ExpansionReport rep;
    double s_max = 0.0, v_max = 0.0;
    for (double v : v_seq) {
        const ChordData c = reflect_from_psi(curve, psi, v);
        const double ds = curve.arc_between(c.psi, c.delta_psi);
        rep.s_residuals.push_back(ds - v * (e.alpha1 + v * (e.alpha2 + v * e.alpha3)));
        rep.v_residuals.push_back(c.v_next - v - v * v * (e.beta2 + v * e.beta3));
        s_max = std::max(s_max, std::abs(rep.s_residuals.back()));
        v_max = std::max(v_max, std::abs(rep.v_residuals.back()));
    }
    // residuals below a few hundred ulps of the leading term are noise
    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<double> sx, sy, vx, vy;
    for (std::size_t i = 0; i < v_seq.size(); ++i) {
        const double v = v_seq[i];
        if (std::abs(rep.s_residuals[i]) > 1e3 * eps * e.alpha1 * v) {
            sx.push_back(v);
            sy.push_back(rep.s_residuals[i]);
        }
        if (std::abs(rep.v_residuals[i]) > 1e3 * eps * v) {
            vx.push_back(v);
            vy.push_back(rep.v_residuals[i]);
        }
    }
    rep.s_exact = sx.empty() && s_max <= 1e3 * eps;
    rep.v_exact = vx.empty();
    if (!rep.s_exact)
        rep.s_fit = fit_power_law(sx, sy);
    if (!rep.v_exact)
        rep.v_fit = fit_power_law(vx, vy);
    return rep;
}

PowerFit tilde_h_remainder_order(const LazutkinChart& chart, double x, const std::vector<double>& gaps)
{
    LazutkinGeneratingFn h(chart);
    std::vector<double> xs, ys;
    const double eps = std::numeric_limits<double>::epsilon();
    for (double gap : gaps) {
        const double cubic = gap * gap * gap / 6.0;
        const double r = h.eval(x, x + gap).value - cubic;
        if (std::abs(r) > 1e3 * eps * cubic) {
            xs.push_back(gap);
            ys.push_back(r);
        }
    }
    return fit_power_law(xs, ys);
}

}  // namespace billiards
