#include "billiards/error.hpp"
#include "billiards/flow.hpp"
#include "billiards/quadrature.hpp"
#include "billiards/smoothing.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <memory>
#include <random>

using namespace billiards;
using namespace billiards::testing;

namespace {

double circle_gap(double a, double b)
{
    const double d = a - b;
    return std::abs(d - std::round(d));
}

SpectralTable constant_table(double (*f)(double, double, double))
{
    SpectralTable t(8, 4, 4, std::sqrt(2e-3), 0.0, 1.0);
    t.fit(f);
    return t;
}

struct OvalSmoothed {
    LazutkinChart chart{build_curve(oval_profile())};
    CutoffGeneratingFn cut{chart, 1e-3};
    ModifiedMap map{cut, 0.15};
    ModifiedGeneratingFn hphi{map};
    SuspensionConfig cfg{};
    SpectralTable table = build_perturbation_table(hphi, cfg);
    SmoothedHamiltonian smooth{table, cfg};
};

const OvalSmoothed& oval()
{
    static const auto s = std::make_unique<OvalSmoothed>();
    return *s;
}

}  // namespace

TEST_CASE("mollifier has unit mass")
{
    const Bump& b = Bump::instance();
    for (double w : {0.01, 0.05}) {
        const auto r = quad::adaptive_gauss([&](double t) { return b.mollifier(t, w); }, -w, w, 1e-14);
        CHECK(std::abs(r.value - 1.0) < 1e-12);
    }
}

TEST_CASE("mollified time basis")
{
    const SpectralTable one = constant_table([](double, double, double) { return 1.0; });
    const PiecewiseHamiltonian hat(one, 0.15);
    const MollifiedHamiltonian star(hat, 0.05);
    std::vector<double> b, bd, direct;
    star.time_basis_direct(0.4, 0, direct);
    CHECK(direct[0] == doctest::Approx(1.0).epsilon(1e-13));
    star.time_basis_direct(0.15, 0, direct);
    CHECK(direct[0] == doctest::Approx(0.5).epsilon(1e-13));  // half the bump lies past the jump
    star.time_basis_direct(0.85, 0, direct);
    CHECK(direct[0] == doctest::Approx(0.5).epsilon(1e-13));
    star.time_basis(0.4, b, bd);
    CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(bd[0]) < 1e-9);
    star.time_basis(0.15, b, bd);
    CHECK(b[0] == doctest::Approx(0.5).epsilon(1e-13));
    star.time_basis(0.0999, b, bd);
    CHECK(b[0] == 0.0);

    std::mt19937 rng(4);
    std::uniform_real_distribution<double> ut(0.1, 0.9);
    for (int i = 0; i < 200; ++i) {
        const double t = ut(rng);
        star.time_basis(t, b, bd);
        star.time_basis_direct(t, 0, direct);
        for (std::size_t m = 0; m < b.size(); ++m)
            CHECK(std::abs(b[m] - direct[m]) < 1e-12);
        star.time_basis_direct(t, 1, direct);
        for (std::size_t m = 0; m < b.size(); ++m)
            CHECK(std::abs(bd[m] - direct[m]) < 1e-7 * (1 + std::abs(direct[m])));
    }

    // H* is the kinetic term before kappa - m_w
    for (double t : {0.0, 0.05, 0.0999})
        CHECK(star.value(0.3, 1e-3, t) == kinetic(1e-3));
}

TEST_CASE("drift of the mollified perturbation is quadratic for polynomial time dependence")
{
    // V(x, u, tau) = tau^2, so away from the jumps V* - V = m^2 mu2 / c^2 exactly
    const SpectralTable sq = constant_table([](double, double, double t) { return t * t; });
    const PiecewiseHamiltonian hat(sq, 0.15);
    const Bump& bump = Bump::instance();
    const double mu2 = quad::adaptive_gauss([&](double s) { return s * s * bump.value(s); }, -1, 1, 1e-14).value;
    const double c = 0.7, l = 1e-3;
    for (double m : {0.01, 0.02, 0.05}) {
        const MollifiedHamiltonian star(hat, m);
        for (double t : {0.15 + m + 1e-3, 0.3, 0.5}) {
            const double vs = star.perturbation(0.2, l, t).value * c / std::pow(l, 2.5);
            const double vh = hat.perturbation(0.2, l, t).value * c / std::pow(l, 2.5);
            CHECK(vs - vh == doctest::Approx(m * m * mu2 / (c * c)).epsilon(1e-8));
        }
    }
}

TEST_CASE("kinetic-only generating function")
{
    const SpectralTable zero = constant_table([](double, double, double) { return 0.0; });
    const PiecewiseHamiltonian hat(zero, 0.15);
    SuspensionConfig cfg;
    cfg.w_nx = 8;
    cfg.w_nu = 4;
    cfg.w_nt = 3;
    const GeneratingW w = generating_w(hat, cfg, 0.2, 0.25);
    for (double l : {0.0, 1e-6, 1e-3})
        for (double t : {0.2, 0.23}) {
            CHECK(w.value(0.4, l, t) == doctest::Approx(-kinetic(l) * t).epsilon(1e-14));
            CHECK(w.partials(0.4, l, t).v == 0.0);
        }
    CHECK(w.value(0.1, 0.0, 0.22) == 0.0);

    // positivity expression for w = -K(l) t: -w_tll = 1/sqrt(2 l), ratio sqrt 2
    const WPartials p = w.partials(0.3, 4e-4, 0.21);
    const double R = -(-kinetic_ll(4e-4) + p.tll) / (1 + p.Xl);
    CHECK(2 * std::sqrt(4e-4) * R == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("coarse w grid is rejected")
{
    const OvalSmoothed& o = oval();
    SuspensionConfig cfg;
    cfg.w_nx = 4;
    cfg.w_nu = 2;
    cfg.w_nt = 2;
    const PiecewiseHamiltonian hat(o.table, cfg.kappa);
    CHECK_THROWS_WITH_AS(generating_w(hat, cfg, cfg.t1, cfg.t2), doctest::Contains("reconstruction"), Error);
}

TEST_CASE("generating function identities against the flow")
{
    const OvalSmoothed& o = oval();
    const SmoothedHalf& h = o.smooth.first();
    double worst_l = 0, worst_X = 0;
    for (double x : {0.11, 0.52, 0.9})
        for (double l : {2e-6, 1e-4, 9e-4})
            for (double t : {0.21, 0.245}) {
                for (int k = 0; k < 2; ++k) {
                    const SuspendedHamiltonian& H = k == 0 ? static_cast<const SuspendedHamiltonian&>(h.hat()) : h.star();
                    const GeneratingW& w = k == 0 ? h.w_hat() : h.w_star();
                    const LazutkinState e = flow(H, {x, l}, 0, t);
                    worst_l = std::max(worst_l, std::abs(w.d_l(e.x, l, t) - (x - e.x)));
                    worst_X = std::max(worst_X, std::abs(w.d_X(e.x, l, t) - (e.l - l)) / l);
                }
            }
    CHECK(worst_l < 1e-6);
    CHECK(worst_X < 1e-6);

    const ReconstructionReport r = reconstruction_check(h.w_star(), h.star(), o.cfg);
    CHECK(r.residual < 1e-5);
    // the form with the extra Jacobian factor differs at order l^{3/2}
    CHECK(r.jacobian_residual > 10 * r.residual);
}

TEST_CASE("smoothed Hamiltonian")
{
    const OvalSmoothed& o = oval();
    const SmoothedHamiltonian& H = o.smooth;
    const PiecewiseHamiltonian hat(o.table, 0.15);
    const double l = 5e-4;
    for (double x : {0.0, 0.3, 0.77}) {
        for (double t : {0.0, 0.05, 0.0999, 0.9001, 0.97})
            CHECK(H.value(x, l, t) == kinetic(l));
        for (double t : {0.26, 0.4, 0.5, 0.6, 0.74})
            CHECK(H.value(x, l, t) == doctest::Approx(hat.value(x, l, t)).epsilon(1e-13));
        for (double t : {0.12, 0.22, 0.81})
            CHECK(H.value(x, l, t) == H.value(x, l, t + 1.0));
        CHECK(H.value(x, 0.0, 0.22) == 0.0);
    }

    // C1 in t across the window edges
    const double dt = 1e-5;
    for (double tb : {o.cfg.t1, o.cfg.t2, 1 - o.cfg.t2, 1 - o.cfg.t1}) {
        const double a = H.value(0.3, l, tb - dt), m = H.value(0.3, l, tb), b = H.value(0.3, l, tb + dt);
        CHECK(std::abs(m - a) < 1e-12 * kinetic(l) + 2 * dt * std::pow(l, 2.5) * 10);
        const double jump = (b - m) / dt - (m - a) / dt;
        CHECK(std::abs(jump) < 0.05 * std::pow(l, 2.5));
    }

    // l-derivatives in the blend window against finite differences
    for (double t : {0.21, 0.23, 0.77}) {
        const double x = 0.4, h = 1e-6 * l;
        const Perturbation p = H.perturbation(x, l, t);
        const double fd_l = (H.perturbation(x, l + h, t).value - H.perturbation(x, l - h, t).value) / (2 * h);
        const double fd_x = (H.perturbation(x + 1e-6, l, t).value - H.perturbation(x - 1e-6, l, t).value) / 2e-6;
        const double fd_ll = (H.perturbation(x, l + h, t).l - H.perturbation(x, l - h, t).l) / (2 * h);
        CHECK(p.l == doctest::Approx(fd_l).epsilon(1e-6));
        CHECK(p.x == doctest::Approx(fd_x).epsilon(1e-6));
        CHECK(p.ll == doctest::Approx(fd_ll).epsilon(1e-4));
    }

    const PositivityReport pos = positivity_check(H);
    CHECK(pos.min_ratio > 1.0);
}

TEST_CASE("time-1 map of the smoothed Hamiltonian is the billiard map")
{
    const OvalSmoothed& o = oval();
    const PiecewiseHamiltonian hat(o.table, 0.15);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ux(0, 1), ul(std::log(1e-5), std::log(1e-3));
    double sup = 0, half = 0;
    for (int i = 0; i < 60; ++i) {
        const LazutkinState s{ux(rng), std::exp(ul(rng))};
        const LazutkinState a = flow(o.smooth, s, 0, 1), b = lazutkin_map(o.chart, s);
        sup = std::max({sup, circle_gap(a.x, b.x), std::abs(a.l - b.l)});
        const LazutkinState c = flow(o.smooth, s, 0, 0.5), d = flow(hat, s, 0, 0.5);
        half = std::max({half, circle_gap(c.x, d.x), std::abs(c.l - d.l)});
    }
    CHECK(sup < 1e-5);
    CHECK(half < 1e-5);
    const LazutkinState w = flow(o.smooth, {0.6, 0.0}, 0, 1);
    CHECK(w.x == 0.6);
    CHECK(w.l == 0.0);
}
