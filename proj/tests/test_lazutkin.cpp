#include "billiards/error.hpp"
#include "billiards/lazutkin.hpp"
#include "billiards/quadrature.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace billiards;
using namespace billiards::testing;

namespace {

double wrap_distance(double a, double b)
{
    double d = a - b;
    d -= std::round(d);
    return std::abs(d);
}

std::vector<double> geometric(int k0, int k1)
{
    std::vector<double> v;
    for (int k = k0; k <= k1; ++k)
        v.push_back(std::ldexp(1.0, -k));
    return v;
}

}  // namespace

TEST_CASE("circle chart is the identity in x")
{
    const LazutkinChart chart(build_curve(circle_profile()));
    CHECK(chart.c1() == doctest::Approx(std::cbrt(kCircleRadius * kCircleRadius)).epsilon(1e-14));
    for (double s : {0.0, 0.125, 0.4, 0.99, 1.0, 2.3})
        CHECK(std::abs(chart.x_of_s(s) - s) < 1e-13);
    CHECK(chart.x_of_s(0.0) == 0.0);
    CHECK(std::abs(chart.x_of_s(1.0) - 1.0) < 1e-15);
}

TEST_CASE("oval chart against an independent adaptive quadrature")
{
    const BoundaryCurve curve = build_curve(oval_profile());
    const LazutkinChart chart(curve);
    auto weight = [&](double s) { return std::pow(curve.radius_of_curvature(s), -2.0 / 3.0); };
    const double total = quad::adaptive_gauss(weight, 0.0, 1.0, 1e-13).value;
    const double half = quad::adaptive_gauss(weight, 0.0, 0.5, 1e-13).value;
    CHECK(std::abs(chart.c1() - 1.0 / total) < 1e-10);
    CHECK(std::abs(chart.x_of_s(0.5) - half / total) < 1e-10);
    CHECK(std::abs(chart.x_of_s(1.7) - chart.x_of_s(0.7) - 1.0) < 1e-13);
    double prev = -1.0;
    bool monotone = true;
    for (int i = 0; i <= 1000; ++i) {
        const double x = chart.x_of_s(i / 1000.0);
        monotone = monotone && x > prev;
        prev = x;
    }
    CHECK(monotone);
    for (double x : {0.05, 0.33, 0.5, 0.91})
        CHECK(std::abs(chart.x_of_s(chart.s_of_x(x)) - x) < 1e-13);
}

TEST_CASE("chart coordinates and round trip")
{
    const LazutkinChart circle(build_curve(circle_profile()));
    for (double v : {0.01, 0.5, 2.0}) {
        const LazutkinState z = circle.to_lazutkin({0.2, v});
        const double y = 4.0 * kCircleRadius * std::sin(0.5 * v);
        CHECK(std::abs(z.l - 0.5 * y * y) < 1e-15);
    }
    CHECK(circle.to_lazutkin({0.3, 0.0}).l == 0.0);

    const LazutkinChart chart(build_curve(lopsided_profile()));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> us(0.0, 1.0), uv(0.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const BilliardState st{us(rng), uv(rng)};
        const BilliardState back = chart.from_lazutkin(chart.to_lazutkin(st));
        worst = std::max({worst, wrap_distance(back.s, st.s), std::abs(back.v - st.v)});
    }
    CHECK(worst < 1e-10);
    CHECK_THROWS_AS(chart.from_lazutkin({0.1, 10.0}), Error);
}

TEST_CASE("circle map in Lazutkin coordinates")
{
    const LazutkinChart chart(build_curve(circle_profile()));
    for (double l : {1e-8, 1e-5, 1e-3, 1e-2}) {
        const double v = 2.0 * std::asin(std::sqrt(2.0 * l) / (4.0 * kCircleRadius));
        const LazutkinState n = lazutkin_map(chart, {0.37, l});
        CHECK(std::abs(n.x - (0.37 + 2.0 * kCircleRadius * v)) < 1e-13);
        CHECK(std::abs(n.l - l) < 1e-12 * l);
    }
    const LazutkinStep limit = lazutkin_step(chart, {0.4, 1e-15});
    CHECK(limit.boundary);
    CHECK(limit.next.x == 0.4);
    CHECK(limit.next.l == 0.0);
}

TEST_CASE("bounded f residual on the oval")
{
    const LazutkinChart chart(build_curve(oval_profile()));
    double worst = 0.0;
    for (double l = 1e-8; l <= 1e-3; l *= 3.0) {
        const LazutkinState n = lazutkin_map(chart, {0.13, l});
        const double f = (n.x - 0.13 - std::sqrt(2.0 * l)) / (2.0 * std::sqrt(2.0) * std::pow(l, 1.5));
        worst = std::max(worst, std::abs(f));
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 10.0);
}

TEST_CASE("conjugacy with the billiard map")
{
    const LazutkinChart chart(build_curve(oval_profile()));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(0.0, 1.0), ul(-8.0, -2.0);
    double worst_x = 0.0, worst_l = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const LazutkinState z{ux(rng), std::pow(10.0, ul(rng))};
        const BilliardState b = chart.from_lazutkin(z);
        const LazutkinState direct = chart.to_lazutkin(reflect(chart.curve(), b));
        const LazutkinState mapped = lazutkin_map(chart, z);
        worst_x = std::max(worst_x, wrap_distance(direct.x, mapped.x));
        worst_l = std::max(worst_l, std::abs(direct.l - mapped.l));
    }
    CHECK(worst_x < 1e-10);
    CHECK(worst_l < 1e-10);
}

TEST_CASE("generating function reproduces the map")
{
    for (const RadiusProfile& prof : {circle_profile(), oval_profile(), lopsided_profile()}) {
        const LazutkinChart chart(build_curve(prof));
        const LazutkinGeneratingFn h(chart);
        for (double x : {0.0, 0.31, 0.77}) {
            for (double l : {1e-6, 1e-4, 1e-2}) {
                const LazutkinState n = lazutkin_map(chart, {x, l});
                const GenPartials g = h.eval(x, n.x);
                CHECK(std::abs(-g.d1 - l) < 1e-8 * std::max(1.0, l));
                CHECK(std::abs(g.d2 - n.l) < 1e-8 * std::max(1.0, n.l));
                CHECK(std::abs(-g.d1 - l) < 1e-8 * l);
                CHECK(std::abs(g.d2 - n.l) < 1e-8 * n.l);
            }
        }
    }
    const LazutkinChart chart(build_curve(oval_profile()));
    const LazutkinGeneratingFn h(chart);
    CHECK_THROWS_AS(h.eval(0.2, 0.2), Error);
}

TEST_CASE("circle generating function closed form")
{
    const LazutkinChart chart(build_curve(circle_profile()));
    const LazutkinGeneratingFn h(chart);
    const double k = 4.0 * kCircleRadius * kCircleRadius;
    for (double d : {1e-3, 0.05, 0.3, 0.8}) {
        const double exact = k * (d - std::sin(kPi * d) / kPi);
        CHECK(std::abs(h.eval(0.2, 0.2 + d).value - exact) < 1e-13 * exact + 1e-18);
    }
    const double d = 1e-3;
    CHECK(h.eval(0.6, 0.6 + d).value / (d * d * d) == doctest::Approx(1.0 / 6.0).epsilon(0.01));
}

TEST_CASE("second partials, twist and the twist-map Jacobian")
{
    const LazutkinChart chart(build_curve(lopsided_profile()));
    const LazutkinGeneratingFn h(chart);
    const double e = 1e-6;
    for (double x : {0.1, 0.45, 0.8}) {
        for (double d : {0.02, 0.1, 0.4}) {
            const GenPartials g = h.eval(x, x + d);
            CHECK(g.d12 < 0.0);
            const double fd12 = (h.eval(x + e, x + d).d2 - h.eval(x - e, x + d).d2) / (2 * e);
            const double fd11 = (h.eval(x + e, x + d).d1 - h.eval(x - e, x + d).d1) / (2 * e);
            const double fd22 = (h.eval(x, x + d + e).d2 - h.eval(x, x + d - e).d2) / (2 * e);
            const double scale = std::abs(g.d12);
            CHECK(std::abs(fd12 - g.d12) < 1e-6 * scale);
            CHECK(std::abs(fd11 - g.d11) < 1e-6 * scale);
            CHECK(std::abs(fd22 - g.d22) < 1e-6 * scale);

            // Jacobian of (x, l) -> (X, L) against differences of the map
            const double l = -g.d1;
            const MapJacobian jac = twist_map_jacobian(g);
            const double dl = 1e-7 * l;
            const LazutkinState px = lazutkin_map(chart, {x + e, l}), mx = lazutkin_map(chart, {x - e, l});
            const LazutkinState pl = lazutkin_map(chart, {x, l + dl}), ml = lazutkin_map(chart, {x, l - dl});
            CHECK(jac.xx == doctest::Approx((px.x - mx.x) / (2 * e)).epsilon(1e-5));
            CHECK(jac.xl == doctest::Approx((pl.x - ml.x) / (2 * dl)).epsilon(1e-5));
            CHECK(jac.lx == doctest::Approx((px.l - mx.l) / (2 * e)).epsilon(1e-4));
            CHECK(jac.ll == doctest::Approx((pl.l - ml.l) / (2 * dl)).epsilon(1e-5));
            CHECK(jac.xx * jac.ll - jac.xl * jac.lx == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("twist decays linearly toward the diagonal")
{
    const LazutkinChart chart(build_curve(oval_profile()));
    const LazutkinGeneratingFn h(chart);
    std::vector<double> gaps = geometric(4, 12), twist;
    for (double d : gaps)
        twist.push_back(-h.eval(0.21, 0.21 + d).d12);
    const PowerFit fit = fit_power_law(gaps, twist);
    CHECK(std::abs(fit.slope - 1.0) < 0.1);
}

TEST_CASE("expansion coefficients")
{
    const BoundaryCurve circle = build_curve(circle_profile());
    const ExpansionCoeffs ec = expansion_coeffs(circle, 0.3);
    CHECK(ec.alpha1 == doctest::Approx(2 * kCircleRadius).epsilon(1e-14));
    CHECK(std::abs(ec.alpha2) < 1e-15);
    CHECK(std::abs(ec.alpha3) < 1e-15);
    CHECK(std::abs(ec.beta2) < 1e-15);
    CHECK(std::abs(ec.beta3) < 1e-15);

    const BoundaryCurve oval = build_curve(oval_profile());
    const double h = 1e-4;
    for (double s : {0.0, 0.1, 0.37}) {
        const ExpansionCoeffs e = expansion_coeffs(oval, s);
        auto rho = [&](double t) { return oval.radius_of_curvature(t); };
        const double r1 = (rho(s + h) - rho(s - h)) / (2 * h);
        const double r2 = (rho(s + h) - 2 * rho(s) + rho(s - h)) / (h * h);
        CHECK(e.beta2 == doctest::Approx(-(2.0 / 3.0) * r1).epsilon(1e-6).scale(1e-3));
        const double r = rho(s);
        const double a3 = (2.0 / 3.0) * r * r * r2 + (4.0 / 9.0) * r * r1 * r1;
        CHECK(e.alpha3 == doctest::Approx(a3).epsilon(1e-5).scale(1e-3));
    }
}

TEST_CASE("expansion orders")
{
    const auto vs = geometric(6, 16);
    const ExpansionReport circle = verify_expansion_order(build_curve(circle_profile()), 0.2, vs);
    CHECK(circle.v_exact);

    for (double s : {0.1, 0.37, 0.66}) {
        const ExpansionReport rep = verify_expansion_order(build_curve(oval_profile()), s, vs);
        INFO("s = " << s << " s-slope " << rep.s_fit.slope << " v-slope " << rep.v_fit.slope);
        CHECK(rep.s_fit.slope >= 3.9);
        CHECK(rep.s_fit.slope <= 4.5);
        CHECK(rep.v_fit.slope >= 3.9);
    }
    // odd symmetry about s = 0 kills the v^4 term there
    const ExpansionReport axis = verify_expansion_order(build_curve(oval_profile()), 0.0, vs);
    CHECK(axis.s_fit.slope >= 3.9);
    CHECK(axis.v_fit.slope >= 3.9);

    const LazutkinChart chart(build_curve(oval_profile()));
    const PowerFit fit = tilde_h_remainder_order(chart, 0.1, geometric(3, 10));
    CHECK(fit.slope >= 3.9);
}
