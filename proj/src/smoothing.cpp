#include "billiards/smoothing.hpp"

#include "billiards/error.hpp"
#include "billiards/flow.hpp"
#include "billiards/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace billiards {

namespace {

double check_action(double l, double u_max)
{
    if (!(l >= 0.0))
        throw Error(ErrorKind::InvalidInput, "negative action");
    const double u = std::sqrt(l);
    if (u > u_max * (1.0 + 1e-12))
        throw Error(ErrorKind::InvalidInput, "action beyond the tabulated range");
    return u;
}

WPartials from_table(const TableDerivs& d, double u)
{
    const double u2 = u * u, u3 = u2 * u, u4 = u2 * u2, u5 = u4 * u;
    WPartials w;
    w.v = u5 * d.v;
    w.X = u5 * d.x;
    w.XX = u5 * d.xx;
    w.t = u5 * d.t;
    w.Xt = u5 * d.xt;
    w.l = 0.5 * (5.0 * u3 * d.v + u4 * d.u);
    w.ll = 0.25 * (15.0 * u * d.v + 9.0 * u2 * d.u + u3 * d.uu);
    w.Xl = 0.5 * (5.0 * u3 * d.x + u4 * d.xu);
    w.Xll = 0.25 * (15.0 * u * d.x + 9.0 * u2 * d.xu + u3 * d.xuu);
    w.tl = 0.5 * (5.0 * u3 * d.t + u4 * d.ut);
    w.tll = 0.25 * (15.0 * u * d.t + 9.0 * u2 * d.ut + u3 * d.uut);
    return w;
}

// L = l + w_X(X, l, t) solved for l by fixed-point iteration (w_Xl is O(l^{3/2})).
template <class DX>
double solve_start(double L, DX&& d_x)
{
    if (L == 0.0)
        return 0.0;
    double l = L, last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
        const double next = L - d_x(l);
        if (!(next > 0.0))
            throw Error(ErrorKind::InversionFail, "start action left (0, inf)");
        const double change = std::abs(next - l);
        l = next;
        // stop at convergence or once roundoff stalls the contraction
        if (change <= 1e-15 * L || (change >= last && change <= 1e-13 * L))
            return l;
        last = change;
    }
    throw Error(ErrorKind::NoConvergence, "start action iteration did not converge");
}

}  // namespace

MollifiedHamiltonian::MollifiedHamiltonian(const PiecewiseHamiltonian& hat, double width) : hat_(&hat), width_(width)
{
    if (!(width > 0.0 && width < hat.kappa()))
        throw Error(ErrorKind::ConfigError, "mollifier width must lie in (0, kappa)");
    const int n = hat.table().nt();
    const double kappa = hat.kappa();
    grid_lo_ = kappa - width;
    const double span = 1.0 - 2.0 * kappa + 2.0 * width;
    grid_n_ = static_cast<int>(std::ceil(span / 4e-5));
    grid_step_ = span / grid_n_;
    m0_.resize(static_cast<std::size_t>(grid_n_ + 1) * n);
    m1_.resize(m0_.size());
    m2_.resize(m0_.size());
    std::vector<double> b;
    for (int i = 0; i <= grid_n_; ++i) {
        const double t = grid_lo_ + i * grid_step_;
        for (int order = 0; order < 3; ++order) {
            time_basis_direct(t, order, b);
            std::copy(b.begin(), b.end(), (order == 0 ? m0_ : order == 1 ? m1_ : m2_).begin() + i * n);
        }
    }
}

void MollifiedHamiltonian::time_basis_direct(double t, int order, std::vector<double>& b) const
{
    const SpectralTable& table = hat_->table();
    const int n = table.nt();
    b.assign(n, 0.0);
    const double kappa = hat_->kappa(), c = 1.0 - 2.0 * kappa;
    const double lo = std::max(kappa, t - width_), hi = std::min(1.0 - kappa, t + width_);
    if (!(hi > lo))
        return;
    const Bump& bump = Bump::instance();
    const quad::GaussRule& rule = quad::gauss_rule();
    const double scale = order == 0 ? 1.0 / width_ : order == 1 ? 1.0 / (width_ * width_) : 1.0 / (width_ * width_ * width_);
    std::vector<double> g, gd;
    constexpr int kPanels = 16;
    const double panel = (hi - lo) / kPanels;
    for (int p = 0; p < kPanels; ++p) {
        const double half = 0.5 * panel, mid = lo + (p + 0.5) * panel;
        for (std::size_t i = 0; i < quad::GaussRule::kNodes; ++i) {
            const double r = mid + half * rule.nodes[i];
            const double z = (t - r) / width_;
            const double e = order == 0 ? bump.value(z) : order == 1 ? bump.derivative(z) : bump.second_derivative(z);
            const double w = half * rule.weights[i] * scale * e;
            table.time_basis((r - kappa) / c, g, gd);
            for (int m = 0; m < n; ++m)
                b[m] += g[m] * w;
        }
    }
}

void MollifiedHamiltonian::time_basis(double t, std::vector<double>& b, std::vector<double>& b_dot) const
{
    const int n = hat_->table().nt();
    b.assign(n, 0.0);
    b_dot.assign(n, 0.0);
    const double z = (t - grid_lo_) / grid_step_;
    if (!(z > 0.0 && z < grid_n_))
        return;
    const int i = std::min(static_cast<int>(z), grid_n_ - 1);
    const double s = z - i, h = grid_step_;
    // cubic Hermite basis on [0, 1]
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    const std::size_t a = static_cast<std::size_t>(i) * n, c = a + n;
    for (int m = 0; m < n; ++m) {
        b[m] = h00 * m0_[a + m] + h * h10 * m1_[a + m] + h01 * m0_[c + m] + h * h11 * m1_[c + m];
        b_dot[m] = h00 * m1_[a + m] + h * h10 * m2_[a + m] + h01 * m1_[c + m] + h * h11 * m2_[c + m];
    }
}

Perturbation MollifiedHamiltonian::perturbation(double x, double l, double t) const
{
    const double s = t - std::floor(t);
    const double kappa = hat_->kappa();
    if (s <= kappa - width_ || s >= 1.0 - kappa + width_)
        return {};
    const SpectralTable& table = hat_->table();
    const double u = check_action(l, table.u_max());
    std::vector<double> b, bd;
    time_basis(s, b, bd);
    Perturbation p = perturbation_from(table.eval_with_time_basis(x, u, b, bd), u);
    const double c = 1.0 - 2.0 * kappa;
    p.value /= c;
    p.x /= c;
    p.l /= c;
    p.ll /= c;
    return p;
}

GeneratingW::GeneratingW(const SuspendedHamiltonian& H, const SuspensionConfig& cfg, double t_lo, double t_hi)
    : table_(cfg.w_nx, cfg.w_nu, cfg.w_nt, std::sqrt(cfg.action_max()), t_lo, t_hi)
{
    if (H.kinetic_scale() != 1.0)
        throw Error(ErrorKind::InvalidInput, "generating w expects a unit kinetic term");
    if (!(t_lo > 0.0 && t_hi > t_lo))
        throw Error(ErrorKind::InvalidInput, "time window must lie in (0, inf)");
    FlowOptions opts;
    opts.tol = cfg.ode_tol;
    table_.fit(
        [&](double X, double u, double t) {
            const double l = u * u;
            // start point x0 with phi^t(x0, l).x = X
            double x0 = X - std::sqrt(2.0 * l) * t;
            for (int it = 0; it < 30; ++it) {
                const FlowSample s = flow_samples(H, {x0, l}, 0.0, {t}, opts).back();
                const double e = s.state.x - X;
                if (std::abs(e) <= 1e-14)
                    return s.action / (l * l * u);
                x0 -= e;
            }
            throw Error(ErrorKind::NoConvergence, "flow start for w node did not converge");
        },
        cfg.jobs);
}

WPartials GeneratingW::partials(double X, double l, double t) const
{
    const double u = check_action(l, table_.u_max());
    return from_table(table_.eval(X, u, t), u);
}

double GeneratingW::value(double X, double l, double t) const { return -kinetic(l) * t + partials(X, l, t).v; }

double GeneratingW::d_l(double X, double l, double t) const { return -kinetic_l(l) * t + partials(X, l, t).l; }

double GeneratingW::start_action(double X, double L, double t) const
{
    return solve_start(L, [&](double l) { return partials(X, l, t).X; });
}

double GeneratingW::reconstruct(double X, double L, double t) const
{
    const double l = start_action(X, L, t);
    return kinetic(l) - partials(X, l, t).t;
}

double GeneratingW::reconstruct_jacobian_form(double X, double L, double t) const
{
    const double l = start_action(X, L, t);
    // zeta = v^2 keeps the integrand smooth at 0
    return quad::gauss(
        [&](double v) {
            if (v == 0.0)
                return 0.0;
            const WPartials w = partials(X, v * v, t);
            return 2.0 * v * (kinetic_l(v * v) - w.tl) * (1.0 + w.Xl);
        },
        0.0, std::sqrt(l), 2);
}

ReconstructionReport reconstruction_check(const GeneratingW& w, const SuspendedHamiltonian& H,
                                          const SuspensionConfig& cfg, double l_min)
{
    ReconstructionReport r;
    const SpectralTable& tab = w.table();
    const double l_max = std::min(cfg.epsilon, w.action_max());
    constexpr int kx = 7, kl = 9;
    for (int i = 0; i < kx; ++i)
        for (int j = 0; j < kl; ++j)
            for (double f : {0.13, 0.5, 0.87}) {
                const double X = (i + 0.37) / kx;
                const double l = l_min * std::pow(l_max / l_min, (j + 0.5) / kl);
                const double t = tab.t_lo() + f * (tab.t_hi() - tab.t_lo());
                const double L = l + w.partials(X, l, t).X;
                const double h = H.value(X, L, t);
                const double e = std::abs(w.reconstruct(X, L, t) - h) / std::abs(h);
                const double ej = std::abs(w.reconstruct_jacobian_form(X, L, t) - h) / std::abs(h);
                r.residual = std::max(r.residual, e);
                if (ej > r.jacobian_residual) {
                    r.jacobian_residual = ej;
                    r.l_at_jacobian_max = l;
                }
            }
    return r;
}

GeneratingW generating_w(const SuspendedHamiltonian& H, const SuspensionConfig& cfg, double t_lo, double t_hi,
                         double tol)
{
    GeneratingW w(H, cfg, t_lo, t_hi);
    const ReconstructionReport r = reconstruction_check(w, H, cfg);
    if (!(r.residual <= tol)) {
        std::ostringstream msg;
        msg << "reconstruction residual " << r.residual << " exceeds " << tol;
        throw Error(ErrorKind::GridTooCoarse, msg.str());
    }
    return w;
}

SmoothedHalf::SmoothedHalf(const SpectralTable& vprime, const SuspensionConfig& cfg)
    : cfg_(cfg),
      table_(vprime),
      hat_(table_, cfg.kappa),
      star_(hat_, cfg.mollifier_width),
      xi_{cfg.t1, cfg.t2},
      w_hat_(generating_w(hat_, cfg, cfg.t1, cfg.t2)),
      w_star_(generating_w(star_, cfg, cfg.t1, cfg.t2))
{
}

WPartials SmoothedHalf::blended(double X, double l, double t) const
{
    const WPartials a = w_hat_.partials(X, l, t), b = w_star_.partials(X, l, t);
    const double s = xi_.value(t), ds = xi_.derivative(t);
    auto mix = [&](double p, double q) { return (1.0 - s) * p + s * q; };
    WPartials w;
    w.v = mix(a.v, b.v);
    w.X = mix(a.X, b.X);
    w.XX = mix(a.XX, b.XX);
    w.l = mix(a.l, b.l);
    w.ll = mix(a.ll, b.ll);
    w.Xl = mix(a.Xl, b.Xl);
    w.Xll = mix(a.Xll, b.Xll);
    w.t = mix(a.t, b.t) + ds * (b.v - a.v);
    w.Xt = mix(a.Xt, b.Xt) + ds * (b.X - a.X);
    w.tl = mix(a.tl, b.tl) + ds * (b.l - a.l);
    w.tll = mix(a.tll, b.tll) + ds * (b.ll - a.ll);
    return w;
}

Perturbation SmoothedHalf::perturbation(double x, double L, double t) const
{
    if (t < cfg_.t1)
        return star_.perturbation(x, L, t);
    if (t > cfg_.t2)
        return hat_.perturbation(x, L, t);
    if (!(L >= 0.0))
        throw Error(ErrorKind::InvalidInput, "negative action");
    if (L == 0.0)
        return {};
    const double l = solve_start(L, [&](double z) { return blended(x, z, t).X; });
    const WPartials w = blended(x, l, t);
    // H(X, L) = -w_t(X, l) with L = l + w_X; kinetic differences taken without cancellation
    const double sl = std::sqrt(l), sL = std::sqrt(L);
    const double dK1 = std::numbers::sqrt2 * (l - L) / (sl + sL);                 // K'(l) - K'(L)
    const double dK2 = (sL - sl) / (std::numbers::sqrt2 * sl * sL);               // K''(l) - K''(L)
    const double den = 1.0 + w.Xl;
    Perturbation p;
    p.value = kinetic_difference(l, L) - w.t;
    p.l = (dK1 - w.tl - kinetic_l(L) * w.Xl) / den;
    const double HL = kinetic_l(L) + p.l;
    p.x = -w.Xt - HL * w.XX;
    const double den2 = den * den;
    p.ll = (dK2 - kinetic_ll(L) * (2.0 * w.Xl + w.Xl * w.Xl) - w.tll) / den2 +
           (-kinetic_l(l) + w.tl) * w.Xll / (den2 * den);
    return p;
}

SmoothedHamiltonian::SmoothedHamiltonian(const SpectralTable& vprime, const SuspensionConfig& cfg)
{
    cfg.validate();
    first_ = std::make_unique<SmoothedHalf>(vprime, cfg);
    second_ = std::make_unique<SmoothedHalf>(vprime.mirrored(), cfg);
}

Perturbation SmoothedHamiltonian::perturbation(double x, double l, double t) const
{
    const double s = t - std::floor(t);
    if (s <= 0.5)
        return first_->perturbation(x, l, s);
    Perturbation p = second_->perturbation(-x, l, 1.0 - s);
    p.x = -p.x;
    return p;
}

std::vector<double> SmoothedHamiltonian::breakpoints() const
{
    const SuspensionConfig& c = config();
    return {c.t1, c.t2, 1.0 - c.t2, 1.0 - c.t1};
}

PositivityReport positivity_scan(const SmoothedHamiltonian& H, int nx, int nl, int nt, double l_min)
{
    PositivityReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    const SuspensionConfig& cfg = H.config();
    for (int half = 0; half < 2; ++half) {
        const SmoothedHalf& h = half == 0 ? H.first() : H.second();
        for (int k = 0; k <= nt; ++k) {
            const double t = cfg.t1 + (cfg.t2 - cfg.t1) * k / nt;
            const double s = h.xi(t), ds = h.xi_dot(t);
            for (int j = 0; j < nl; ++j) {
                const double l = l_min * std::pow(cfg.epsilon / l_min, static_cast<double>(j) / (nl - 1));
                for (int i = 0; i < nx; ++i) {
                    const double x = static_cast<double>(i) / nx;
                    const WPartials a = h.w_hat().partials(x, l, t), b = h.w_star().partials(x, l, t);
                    const double tll = -kinetic_ll(l) + (1.0 - s) * a.tll + s * b.tll;
                    const double Xl = (1.0 - s) * a.Xl + s * b.Xl;
                    const double R = -(ds * (b.ll - a.ll) + tll) / (1.0 + Xl);
                    const double ratio = 2.0 * std::sqrt(l) * R;
                    if (ratio < rep.min_ratio)
                        rep = {ratio, half == 0 ? x : -x, l, half == 0 ? t : 1.0 - t, half == 1};
                }
            }
        }
    }
    return rep;
}

PositivityReport positivity_check(const SmoothedHamiltonian& H, int nx, int nl, int nt, double l_min)
{
    const PositivityReport rep = positivity_scan(H, nx, nl, nt, l_min);
    if (!(rep.min_ratio > 1.0)) {
        std::ostringstream msg;
        msg << "positivity ratio " << rep.min_ratio << " <= 1 at x=" << rep.x << " l=" << rep.l << " t=" << rep.t;
        throw Error(ErrorKind::PositivityViolation, msg.str());
    }
    return rep;
}

}  // namespace billiards
