#include "billiards/lagrangian.hpp"

#include "billiards/error.hpp"
#include "billiards/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace billiards {

InterpolatingLagrangian::InterpolatingLagrangian(const GeneratingFn& h, double rel_tol)
    : h_(&h), c_(h.cubic_scale()), rel_tol_(rel_tol)
{
}

double InterpolatingLagrangian::stiffness(double x, double v, double t) const
{
    if (v == 0.0)
        return 0.0;
    return -h_->d12(x - v * t, x + v * (1.0 - t));
}

InterpolatingLagrangian::Values InterpolatingLagrangian::evaluate(double x, double v, double t) const
{
    if (!(v >= 0.0) || !(t >= 0.0 && t <= 1.0))
        throw Error(ErrorKind::InvalidInput, "Lagrangian needs v >= 0 and t in [0, 1]");
    Values out;
    if (v == 0.0)
        return out;
    const double c2 = c_ * c_;
    // integrand components: (v - eta) p(eta) and p(eta), p = d12 h + eta / c^2
    auto integrand = [&](double eta) {
        const double p = h_->d12(x - eta * t, x + eta * (1.0 - t)) + eta / c2;
        return std::array<double, 2>{(v - eta) * p, p};
    };
    // d12 h carries absolute rounding noise ~ eps / c^2 from the argument
    // difference; refining below that level cannot converge.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * v / c2;
    const auto r = quad::adaptive_gauss_n<2>(integrand, 0.0, v, rel_tol_, {noise * v, noise});
    out.L_pert = -r.value[0];
    out.Lv_pert = -r.value[1];
    out.L = v * v * v / (6.0 * c2) + out.L_pert;
    out.Lv = v * v / (2.0 * c2) + out.Lv_pert;
    out.Lvv = stiffness(x, v, t);
    return out;
}

LegendreResult legendre_hamiltonian(const InterpolatingLagrangian& lag, double x, double l, double t, double tol)
{
    if (!(l >= 0.0))
        throw Error(ErrorKind::InvalidInput, "Legendre transform needs l >= 0");
    LegendreResult out;
    if (l == 0.0)
        return out;
    const double c = lag.cubic_scale();
    const double c2 = c * c;
    const double v0 = c * std::sqrt(2.0 * l);
    // g(v) = L_v(v) - l is increasing with g(0) = -l. H = v l - L is stationary
    // at the root, so once a Newton step is below tol the value at the last
    // quadrature point plus the quadratic correction is exact to rounding.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double v = v0;
    InterpolatingLagrangian::Values val;
    double g = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        try {
            val = lag.evaluate(x, v, t);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::QuadratureStall)
                throw;
            throw Error(ErrorKind::InversionFail, std::string("Legendre inversion left the domain: ") + e.what());
        }
        g = (v - v0) * (v + v0) / (2.0 * c2) + val.Lv_pert;
        if (g == 0.0) {
            converged = true;
            break;
        }
        if (g > 0.0)
            hi = v;
        else
            lo = v;
        const double newton = v - g / val.Lvv;
        if (newton >= lo && newton <= hi && std::abs(newton - v) <= std::sqrt(tol) * v) {
            converged = true;  // quadratic convergence: next step would be below tol
            break;
        }
        double next = newton;
        if (!(next > lo && next < hi) || !std::isfinite(next))
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * v;
        if (next > 1.0 && !std::isfinite(hi))
            throw Error(ErrorKind::InversionFail, "no bracket for the Legendre maximizer");
        v = next;
    }
    if (!converged)
        throw Error(ErrorKind::InversionFail, "Legendre inversion did not converge");
    // H(v*) = H(v) + g^2 / (2 L_vv) + O(g^3) with H(v) = v l - L(v)
    const double d = v - v0;
    const double correction = g * g / (2.0 * val.Lvv);
    out.v = v - g / val.Lvv;
    out.H_pert = -d * d * (v + 2.0 * v0) / (6.0 * c2) - val.L_pert + correction;
    out.H = 2.0 * std::numbers::sqrt2 / 3.0 * c * l * std::sqrt(l) + out.H_pert;
    out.Hll = 1.0 / val.Lvv;
    return out;
}
namespace {

// Gauss-Legendre 4-point rule on [0, 1]
constexpr std::array<double, 4> kNodes01 = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                            0.9305681557970263};
constexpr std::array<double, 4> kWeights01 = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                              0.1739274225687269};

}  // namespace

PathMinimum minimize_path_action(const InterpolatingLagrangian& lag, double x, double X, int segments,
                                 double initial_bend)
{
    const int n = segments;
    const double dt = 1.0 / n;
    std::vector<double> g(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double t = k * dt;
        g[k] = x + (X - x) * t + initial_bend * std::sin(std::numbers::pi * t) * (1.0 + 0.5 * std::sin(7.0 * t));
    }
    const double fd = 1e-6 * std::max(1e-3, std::abs(X - x));

    auto action = [&](const std::vector<double>& p) {
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            const double s = (p[k + 1] - p[k]) / dt;
            for (std::size_t q = 0; q < kNodes01.size(); ++q) {
                const double tau = kNodes01[q];
                total += kWeights01[q] * dt * lag.value(p[k] + s * tau * dt, s, (k + tau) * dt);
            }
        }
        return total;
    };

    PathMinimum out;
    for (int iter = 0; iter < 30; ++iter) {
        // gradient and the kinetic (L_vv) part of the Hessian
        std::vector<double> grad(n + 1, 0.0), diag(n + 1, 0.0), off(n + 1, 0.0);
        for (int k = 0; k < n; ++k) {
            const double s = (g[k + 1] - g[k]) / dt;
            if (!(s > 0.0))
                throw Error(ErrorKind::NoConvergence, "path lost monotonicity");
            for (std::size_t q = 0; q < kNodes01.size(); ++q) {
                const double tau = kNodes01[q];
                const double t = (k + tau) * dt;
                const double pos = g[k] + s * tau * dt;
                const auto val = lag.evaluate(pos, s, t);
                const double lx = (lag.value(pos + fd, s, t) - lag.value(pos - fd, s, t)) / (2.0 * fd);
                const double w = kWeights01[q] * dt;
                grad[k] += w * (lx * (1.0 - tau) - val.Lv / dt);
                grad[k + 1] += w * (lx * tau + val.Lv / dt);
                const double kin = w * val.Lvv / (dt * dt);
                diag[k] += kin;
                diag[k + 1] += kin;
                off[k] -= kin;
            }
        }
        // tridiagonal solve on interior nodes 1..n-1
        std::vector<double> cprime(n + 1, 0.0), dprime(n + 1, 0.0), step(n + 1, 0.0);
        for (int k = 1; k < n; ++k) {
            const double a = (k > 1) ? off[k - 1] : 0.0;
            const double denom = diag[k] - a * cprime[k - 1];
            cprime[k] = off[k] / denom;
            dprime[k] = (-grad[k] - a * dprime[k - 1]) / denom;
        }
        double largest = 0.0;
        for (int k = n - 1; k >= 1; --k) {
            step[k] = dprime[k] - (k + 1 < n ? cprime[k] * step[k + 1] : 0.0);
            largest = std::max(largest, std::abs(step[k]));
        }
        for (int k = 1; k < n; ++k)
            g[k] += step[k];
        out.iterations = iter + 1;
        if (largest < 1e-13)
            break;
    }
    out.action = action(g);
    out.path = g;
    for (int k = 0; k <= n; ++k)
        out.max_bend = std::max(out.max_bend, std::abs(g[k] - (x + (X - x) * k * dt)));
    return out;
}

}  // namespace billiards
