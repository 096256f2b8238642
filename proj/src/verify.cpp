#include "billiards/verify.hpp"

#include "billiards/error.hpp"
#include "billiards/flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace billiards {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double circle_distance(double a, double b)
{
    const double d = a - b;
    return std::abs(d - std::round(d));
}

}  // namespace

SuspensionPipeline::SuspensionPipeline(const LazutkinChart& chart, const SuspensionConfig& cfg)
    : start_(Clock::now()),
      chart_(&chart),
      cfg_((cfg.validate(), cfg)),
      cut_(chart, cfg.epsilon),
      map_(cut_, cfg.kappa),
      hphi_(map_),
      table_(build_perturbation_table(hphi_, cfg_)),
      hat_(table_, cfg.kappa),
      smooth_(table_, cfg_)
{
    seconds_ = seconds_since(start_);
}

ConjugationReport conjugation_check(const SuspendedHamiltonian& H, const LazutkinChart& chart,
                                    const SampleOptions& opts, const FlowOptions& flow_opts)
{
    if (!(opts.l_min > 0.0 && opts.l_max >= opts.l_min) || opts.points < 1)
        throw Error(ErrorKind::InvalidInput, "bad conjugation sample range");
    ConjugationReport r;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ux(0.0, 1.0), ul(std::log(opts.l_min), std::log(opts.l_max));
    for (int i = 0; i < opts.points; ++i) {
        ConjugationPoint p;
        p.start = {ux(rng), std::exp(ul(rng))};
        p.flow = flow(H, p.start, 0.0, 1.0, flow_opts);
        p.map = lazutkin_map(chart, p.start);
        p.dx = circle_distance(p.flow.x, p.map.x);
        p.dl = std::abs(p.flow.l - p.map.l);
        r.sup_dx = std::max(r.sup_dx, p.dx);
        r.sup_dl = std::max(r.sup_dl, p.dl);
        r.sup_dl_rel = std::max(r.sup_dl_rel, p.dl / p.start.l);
        r.points.push_back(p);
    }
    r.sup_error = std::max(r.sup_dx, r.sup_dl);
    return r;
}

RemainderReport remainder_fit(const SuspendedHamiltonian& H, double l_min, double l_max, int nl, int nx, int nt)
{
    RemainderReport r;
    for (int j = 0; j < nl; ++j) {
        const double l = l_min * std::pow(l_max / l_min, static_cast<double>(j) / (nl - 1));
        double sup = 0.0;
        for (int i = 0; i < nx; ++i)
            for (int k = 0; k < nt; ++k) {
                const double x = (i + 0.5) / nx, t = static_cast<double>(k) / (nt - 1);
                sup = std::max(sup, std::abs(H.value(x, l, t) - H.kinetic_scale() * kinetic(l)));
            }
        r.l.push_back(l);
        r.sup.push_back(sup);
        r.max_scaled = std::max(r.max_scaled, sup / std::pow(l, 2.5));
    }
    r.fit = fit_power_law(r.l, r.sup);
    return r;
}

double periodicity_error(const SuspendedHamiltonian& H, double l_max)
{
    double worst = 0.0;
    for (double l : {0.01 * l_max, 0.3 * l_max, l_max})
        for (int i = 0; i < 8; ++i)
            for (int k = 0; k < 40; ++k) {
                const double x = (i + 0.25) / 8, t = (k + 0.5) / 40;
                worst = std::max(worst, std::abs(H.value(x, l, t + 1.0) - H.value(x, l, t)));
            }
    return worst;
}

double time_derivative_jump(const SmoothedHamiltonian& H, double dt)
{
    const SuspensionConfig& c = H.config();
    double worst = 0.0;
    for (double l : {1e-5, 1e-4, 0.5 * c.epsilon})
        for (double x : {0.1, 0.3, 0.6, 0.85})
            for (double tb : {c.t1, c.t2, 1.0 - c.t2, 1.0 - c.t1}) {
                auto hp = [&](double t) { return H.perturbation(x, l, t).value; };
                const double a = hp(tb - dt), m = hp(tb), b = hp(tb + dt);
                worst = std::max(worst, std::abs((b - m) - (m - a)) / dt / std::pow(l, 2.5));
            }
    return worst;
}

DriftReport drift_bound(const PiecewiseHamiltonian& hat, const std::vector<double>& widths)
{
    DriftReport r;
    const double kappa = hat.kappa(), c = 1.0 - 2.0 * kappa;
    const double u_max = hat.table().u_max();
    for (double m : widths) {
        const MollifiedHamiltonian star(hat, m);
        double sup = 0.0;
        for (double uf : {0.2, 0.5, 0.9}) {
            const double l = uf * uf * u_max * u_max, scale = c / std::pow(l, 2.5);
            for (int i = 0; i < 16; ++i)
                for (int k = 0; k <= 20; ++k) {
                    const double x = (i + 0.5) / 16;
                    const double t = kappa + m + (0.5 - kappa - m) * k / 20.0;
                    const double d = (star.perturbation(x, l, t).value - hat.perturbation(x, l, t).value) * scale;
                    sup = std::max(sup, std::abs(d));
                }
        }
        r.widths.push_back(m);
        r.sup.push_back(sup);
        r.linear_constant = std::max(r.linear_constant, sup / m);
    }
    r.fit = fit_power_law(r.widths, r.sup, 0.0, 2);
    return r;
}

double loop_circulation(const std::function<LazutkinState(const LazutkinState&)>& map, const LazutkinState& center,
                        double rx, double rl, int n)
{
    const double h = 2.0 * std::numbers::pi / n;
    std::vector<double> d(n), L(n), xd(n);
    double circ = 0.0;
    for (int k = 0; k < n; ++k) {
        const double th = k * h;
        const LazutkinState z{center.x + rx * std::cos(th), center.l + rl * std::sin(th)};
        const LazutkinState img = map(z);
        double shift = img.x - z.x;
        if (k > 0)
            shift -= std::round(shift - d[0]);
        d[k] = shift;
        L[k] = img.l;
        xd[k] = -rx * std::sin(th);
        circ += z.l * xd[k] * h;
    }
    // spectral derivative of the periodic displacement X - x
    std::vector<double> dd(n, 0.0);
    for (int j = 1; j < (n + 1) / 2; ++j) {
        std::complex<double> coef = 0.0;
        for (int k = 0; k < n; ++k)
            coef += d[k] * std::polar(1.0, -j * k * h);
        coef /= static_cast<double>(n);
        for (int k = 0; k < n; ++k)
            dd[k] += 2.0 * std::real(std::complex<double>(0.0, j) * coef * std::polar(1.0, j * k * h));
    }
    for (int k = 0; k < n; ++k)
        circ -= L[k] * (xd[k] + dd[k]) * h;
    return circ;
}

MainTheoremReport verify_main_theorem(const SuspensionPipeline& p, const MainTheoremOptions& opts)
{
    const auto t0 = Clock::now();
    MainTheoremReport r;
    const SmoothedHamiltonian& H = p.smoothed();
    const SuspensionConfig& cfg = p.config();
    FlowOptions fo;
    fo.tol = cfg.ode_tol;
    r.conjugation = conjugation_check(H, p.chart(), opts.sample, fo);
    r.conjugation_ok = r.conjugation.sup_error < opts.conjugation_tol;
    r.remainder = remainder_fit(H, 1e-6, cfg.epsilon);
    r.remainder_ok = std::abs(r.remainder.fit.slope - opts.exponent_target) <= opts.exponent_tol;
    r.periodicity = periodicity_error(H, cfg.epsilon);
    r.periodic_ok = r.periodicity == 0.0;
    r.c1_jump = time_derivative_jump(H);
    r.positivity = positivity_scan(H);
    r.positivity_ok = r.positivity.min_ratio > 1.0;
    for (const SmoothedHalf* half : {&H.first(), &H.second()}) {
        for (int k = 0; k < 2; ++k) {
            const ReconstructionReport rr =
                k == 0 ? reconstruction_check(half->w_hat(), half->hat(), cfg)
                       : reconstruction_check(half->w_star(), half->star(), cfg);
            r.reconstruction.residual = std::max(r.reconstruction.residual, rr.residual);
            if (rr.jacobian_residual > r.reconstruction.jacobian_residual) {
                r.reconstruction.jacobian_residual = rr.jacobian_residual;
                r.reconstruction.l_at_jacobian_max = rr.l_at_jacobian_max;
            }
        }
    }
    r.boundary = flow(H, {0.25, 0.0}, 0.0, 1.0, fo);
    r.boundary_ok = r.boundary.x == 0.25 && r.boundary.l == 0.0;
    r.build_seconds = p.build_seconds();
    r.total_seconds = r.build_seconds + seconds_since(t0);
    return r;
}

MainTheoremReport verify_main_theorem(const LazutkinChart& chart, const SuspensionConfig& cfg,
                                      const MainTheoremOptions& opts)
{
    const SuspensionPipeline p(chart, cfg);
    return verify_main_theorem(p, opts);
}

}  // namespace billiards
