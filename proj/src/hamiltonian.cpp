#include "billiards/hamiltonian.hpp"

#include "billiards/error.hpp"
#include "billiards/lagrangian.hpp"

#include <cmath>
#include <numbers>

namespace billiards {

namespace {
constexpr double kKin = 2.0 * std::numbers::sqrt2 / 3.0;
}

double kinetic(double l) { return kKin * l * std::sqrt(l); }
double kinetic_l(double l) { return std::sqrt(2.0 * l); }
double kinetic_ll(double l) { return l > 0.0 ? 1.0 / std::sqrt(2.0 * l) : std::numeric_limits<double>::infinity(); }

double kinetic_difference(double a, double b)
{
    // a^{3/2} - b^{3/2} = (a - b)(a + sqrt(ab) + b) / (sqrt a + sqrt b)
    const double sa = std::sqrt(a), sb = std::sqrt(b);
    if (sa + sb == 0.0)
        return 0.0;
    return kKin * (a - b) * (a + sa * sb + b) / (sa + sb);
}

SuspensionConfig SuspensionConfig::with_defaults(double kappa, double mollifier_width)
{
    SuspensionConfig c;
    c.kappa = kappa;
    c.mollifier_width = mollifier_width;
    c.t1 = kappa + mollifier_width;
    c.t2 = c.t1 + kappa / 3.0;
    return c;
}

void SuspensionConfig::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
    if (!(kappa > 0.0 && kappa < 0.2))
        fail("kappa must lie in (0, 1/5)");
    if (!(mollifier_width > 0.0 && mollifier_width < kappa))
        fail("mollifier width must lie in (0, kappa)");
    if (!(t1 > kappa && t1 < t2 && t2 < 2.0 * kappa))
        fail("blend window must satisfy kappa < t1 < t2 < 2 kappa");
    if (!(t2 - t1 > kappa / 4.0))
        fail("blend window must be longer than kappa / 4");
    if (!(epsilon > 0.0 && 2.0 * std::sqrt(2.0 * epsilon) < 1.0))
        fail("cutoff level out of range");
    if (!(quad_tol > 0.0 && ode_tol > 0.0 && legendre_tol > 0.0))
        fail("tolerances must be positive");
    if (!(table_action_factor >= 1.0))
        fail("tables must cover at least [0, epsilon]");
    if (table_nx < 4 || table_nx % 2 || table_nu < 2 || table_nt < 2 || w_nx < 4 || w_nx % 2 || w_nu < 2 || w_nt < 2)
        fail("table sizes too small");
    if (jobs < 1)
        fail("jobs must be positive");
}

double SuspendedHamiltonian::value(double x, double l, double t) const
{
    return kinetic_scale() * kinetic(l) + perturbation(x, l, t).value;
}

double SuspendedHamiltonian::d_l(double x, double l, double t) const
{
    return kinetic_scale() * kinetic_l(l) + perturbation(x, l, t).l;
}

double SuspendedHamiltonian::d_x(double x, double l, double t) const { return perturbation(x, l, t).x; }

double SuspendedHamiltonian::d_ll(double x, double l, double t) const
{
    return kinetic_scale() * kinetic_ll(l) + perturbation(x, l, t).ll;
}

Perturbation perturbation_from(const TableDerivs& d, double u)
{
    const double u2 = u * u, u3 = u2 * u;
    Perturbation p;
    p.value = u3 * u2 * d.v;
    p.x = u3 * u2 * d.x;
    p.l = 0.5 * (5.0 * u3 * d.v + u3 * u * d.u);
    p.ll = 0.25 * (15.0 * u * d.v + 9.0 * u2 * d.u + u3 * d.uu);
    return p;
}

Perturbation table_perturbation(const SpectralTable& table, double x, double l, double tau)
{
    if (!(l >= 0.0))
        throw Error(ErrorKind::InvalidInput, "negative action");
    const double u = std::sqrt(l);
    if (u > table.u_max() * (1.0 + 1e-12))
        throw Error(ErrorKind::InvalidInput, "action beyond the tabulated range");
    return perturbation_from(table.eval(x, u, tau), u);
}

SpectralTable build_perturbation_table(const GeneratingFn& h, const SuspensionConfig& cfg)
{
    SpectralTable table(cfg.table_nx, cfg.table_nu, cfg.table_nt, std::sqrt(cfg.action_max()), 0.0, 1.0);
    const InterpolatingLagrangian lag(h, cfg.quad_tol);
    table.fit(
        [&](double x, double u, double tau) {
            const double l = u * u;
            const LegendreResult r = legendre_hamiltonian(lag, x, l, tau, cfg.legendre_tol);
            return r.H_pert / (l * l * u);
        },
        cfg.jobs);
    return table;
}

Perturbation NonperiodicHamiltonian::perturbation(double x, double l, double t) const
{
    return table_perturbation(*table_, x, l, t);
}

Perturbation PiecewiseHamiltonian::perturbation(double x, double l, double t) const
{
    const double s = t - std::floor(t);
    if (s < kappa_ || s > 1.0 - kappa_)
        return {};
    const double c = 1.0 - 2.0 * kappa_;
    Perturbation p = table_perturbation(*table_, x, l, (s - kappa_) / c);
    p.value /= c;
    p.x /= c;
    p.l /= c;
    p.ll /= c;
    return p;
}

}  // namespace billiards
