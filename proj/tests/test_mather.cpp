#include "billiards/error.hpp"
#include "billiards/lazutkin.hpp"
#include "billiards/mather.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace billiards;
using namespace billiards::testing;

namespace {

double circle_beta(double w) { return (w - std::sin(kPi * w) / kPi) / (kPi * kPi); }

double circle_alpha(double c)
{
    const double r = kCircleRadius;
    const double a = std::asin(std::sqrt(c / (8 * r * r)));
    return 4 * r * c * a - 16 * r * r * r * a + 2 * r * std::sqrt(8 * r * r * c - c * c);
}

std::vector<double> lift(const std::vector<double>& wrapped)
{
    std::vector<double> out{wrapped[0]};
    for (std::size_t i = 1; i < wrapped.size(); ++i) {
        double d = wrapped[i] - wrapped[i - 1];
        d -= std::floor(d);
        out.push_back(out.back() + d);
    }
    return out;
}

std::vector<double> reciprocal_grid()
{
    std::vector<double> w;
    for (int n : {250, 200, 160, 130, 110, 90, 75, 62, 52, 44, 37, 31, 26, 22, 19, 16, 14, 12, 10})
        w.push_back(1.0 / n);
    return w;
}

}  // namespace

TEST_CASE("circle minimizers are rigid rotations with closed-form action")
{
    const LazutkinChart chart(build_curve(circle_profile()));
    const LazutkinGeneratingFn h(chart);
    for (auto [p, q] : {std::pair{1, 3}, {2, 5}, {1, 8}, {3, 7}}) {
        const Configuration c = minimal_configuration(h, p, q);
        CHECK(c.residual < 1e-9);
        CHECK(c.x[0] >= 0.0);
        CHECK(c.x[0] < 1.0);
        for (int i = 1; i < q; ++i)
            CHECK(c.x[i] - c.x[i - 1] == doctest::Approx(static_cast<double>(p) / q).epsilon(1e-9));
        const double w = static_cast<double>(p) / q;
        const double step = 4 * kCircleRadius * kCircleRadius * (w - std::sin(kPi * w) / kPi);
        CHECK(c.action / q == doctest::Approx(step).epsilon(1e-9));
    }
}

TEST_CASE("single point of type (1,1) is stationary")
{
    // standard-map generating function: (X - x)^2/2 + a cos(2 pi x), minimum at x = 1/2
    struct StandardMap final : GeneratingFn {
        double a = 0.05;
        GenPartials eval(double x, double X) const override
        {
            const double d = X - x, k = 2 * kPi;
            return {0.5 * d * d + a * std::cos(k * x), -d - a * k * std::sin(k * x), d,
                    1.0 - a * k * k * std::cos(k * x), -1.0, 1.0};
        }
    } h;
    const Configuration c = minimal_configuration(h, 1, 1);
    const GenPartials g = h.eval(c.x[0], c.x[0] + 1.0);
    CHECK(std::abs(g.d1 + g.d2) < 1e-9);
    CHECK(c.x[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(c.action == doctest::Approx(0.5 - h.a).epsilon(1e-12));
}

TEST_CASE("oval minimizer beats the equispaced configuration and stays ordered")
{
    const LazutkinChart chart(build_curve(oval_profile()));
    const LazutkinGeneratingFn h(chart);
    const Configuration c = minimal_configuration(h, 1, 5);
    CHECK(c.residual < 1e-9);
    for (std::size_t i = 1; i < c.x.size(); ++i)
        CHECK(c.x[i] > c.x[i - 1]);
    CHECK(c.x.back() < c.x[0] + 1.0);
    double best_equi = 1e300;
    for (int k = 0; k < 50; ++k) {
        std::vector<double> x;
        for (int i = 0; i < 5; ++i)
            x.push_back(k / 250.0 + i / 5.0);
        best_equi = std::min(best_equi, configuration_action(h, 1, x));
    }
    CHECK(c.action < best_equi);
    const auto g = configuration_gradient(h, 1, c.x);
    for (double v : g)
        CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("more restarts never raise the minimal action")
{
    const LazutkinChart chart(build_curve(lopsided_profile()));
    const LazutkinGeneratingFn h(chart);
    double prev = 1e300;
    for (int r : {1, 2, 4, 8}) {
        MinimizeOptions o;
        o.restarts = r;
        const double a = minimal_configuration(h, 2, 7, o).action;
        CHECK(a <= prev + 1e-14);
        prev = a;
    }
}

TEST_CASE("invalid periodic types are rejected")
{
    const CubicGeneratingFn h;
    CHECK_THROWS_AS(minimal_configuration(h, 2, 4), Error);
    CHECK_THROWS_AS(minimal_configuration(h, 0, 3), Error);
}

TEST_CASE("convergents")
{
    const auto c = convergents((std::sqrt(5.0) - 1) / 2, 100);
    const std::vector<std::pair<int, int>> fib{{0, 1}, {1, 1}, {1, 2}, {2, 3}, {3, 5}, {5, 8}, {8, 13}, {13, 21}, {21, 34}, {34, 55}, {55, 89}};
    CHECK(c == fib);
    const auto r = convergents(3.0 / 8.0, 2000);
    CHECK(r.back() == std::pair{3, 8});
}

TEST_CASE("circle beta matches the closed form")
{
    const LazutkinChart chart(build_curve(circle_profile()));
    const LazutkinGeneratingFn h(chart);
    for (double w : {1.0 / 3, 1.0 / 5, 1.0 / 8, 0.1})
        CHECK(std::abs(beta_at(h, w).beta - circle_beta(w)) < 1e-8);
    CHECK(beta_at(h, 0.0).beta == 0.0);
    CHECK(beta_at(h, -0.2).beta == beta_at(h, 0.2).beta);
    const double ratio = beta_at(h, 0.01).beta / 1e-6;
    CHECK(std::abs(ratio - 1.0 / 6) < 0.02 / 6);
    // irrational rotation number through convergents
    const double golden = (std::sqrt(5.0) - 1) / 2;
    const BetaValue g = beta_at(h, golden);
    CHECK(std::abs(g.beta - circle_beta(golden)) < 1e-8);
    CHECK(g.err < 1e-6);
}

TEST_CASE("circle alpha, convexity and Fenchel")
{
    const LazutkinChart chart(build_curve(circle_profile()));
    const LazutkinGeneratingFn h(chart);
    const BetaTable beta = beta_table(h, reciprocal_grid());
    CHECK(beta.convex);
    CHECK(beta.omega.front() == 0.0);
    const double scale = 8 * kCircleRadius * kCircleRadius;
    std::vector<double> cs;
    for (int k = 0; k <= 20; ++k)
        cs.push_back(scale * std::pow(10.0, -4.0 + 2.0 * k / 20));
    const AlphaTable alpha = alpha_table(beta, cs);
    CHECK(alpha.convex);
    for (std::size_t i = 0; i < cs.size(); ++i)
        CHECK(std::abs(alpha.alpha[i] / circle_alpha(alpha.c[i]) - 1.0) < 0.01);
    CHECK(alpha_from_beta(beta, 0.0) == 0.0);
    CHECK_THROWS_AS(alpha_from_beta(beta, 1.0), Error);

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick_w(0, beta.omega.size() - 1), pick_c(0, cs.size() - 1);
    double worst = -1.0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t i = pick_w(rng), j = pick_c(rng);
        worst = std::max(worst, alpha.c[j] * beta.omega[i] - alpha.alpha[j] - beta.beta[i]);
    }
    CHECK(worst <= 1e-9);
    CHECK(fenchel_violation(beta, alpha) <= 1e-9);
}

TEST_CASE("beta is cubically degenerate at zero")
{
    std::vector<double> grid;
    for (int n : {1000, 500, 200, 100, 50, 20})
        grid.push_back(1.0 / n);
    const LazutkinChart circle(build_curve(circle_profile()));
    const DegeneracyReport rc = beta_degeneracy_check(beta_table(LazutkinGeneratingFn(circle), grid));
    CHECK(rc.fit.slope == doctest::Approx(3.0).epsilon(0.02 / 3));
    CHECK(rc.cubic);
    const LazutkinChart oval(build_curve(oval_profile()));
    const BetaTable t = beta_table(LazutkinGeneratingFn(oval), grid);
    CHECK(t.convex);
    CHECK(beta_degeneracy_check(t).cubic);
}

TEST_CASE("rotation numbers")
{
    const BoundaryCurve circle = build_curve(circle_profile());
    std::vector<double> s;
    for (const auto& st : orbit(circle, BilliardState{0.1, kPi / 7}, 700))
        s.push_back(st.s);
    const RotationEstimate r = rotation_number(lift(s));
    CHECK(std::abs(r.omega - 1.0 / 7) < 1e-12);
    CHECK(r.error < 1e-10);

    CHECK(rotation_number(std::vector<double>(200, 0.3)).omega == 0.0);
    CHECK_THROWS_AS(rotation_number(std::vector<double>(50, 0.0)), Error);

    // twist: rotation number grows with the action along a fiber
    const LazutkinChart oval(build_curve(oval_profile()));
    double prev = 0.0;
    for (double l : {1e-4, 4e-4, 1.6e-3, 6.4e-3}) {
        std::vector<double> x{0.2};
        LazutkinState st{0.2, l};
        for (int n = 0; n < 2000; ++n) {
            const LazutkinState nx = lazutkin_map(oval, st);
            double d = nx.x - st.x;
            d -= std::floor(d);
            x.push_back(x.back() + d);
            st = nx;
        }
        const RotationEstimate e = rotation_number(x);
        CHECK(e.omega > prev);
        CHECK(e.omega < 0.5);
        prev = e.omega;
    }
}

TEST_CASE("gap measure")
{
    const LazutkinChart circle(build_curve(circle_profile()));
    const LazutkinGeneratingFn hc(circle);
    const MatherSetApprox mc = gap_measure(hc, 0.3, 100);
    CHECK(mc.q == 10);
    CHECK(mc.degenerate);
    CHECK(mc.gap == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(mc.graph_ok);

    // strong two-mode oval without central symmetry: the (1,2) minimizer is not equispaced
    const LazutkinChart strong(build_curve(RadiusProfile{{1.0, 0.0, 0.45, 0.2}, {}}));
    const LazutkinGeneratingFn hs(strong);
    const MatherSetApprox half = gap_measure(hs, 0.5, 100);
    CHECK_FALSE(half.degenerate);
    CHECK(half.gap > 0.5 + 1e-3);
    CHECK(half.graph_ok);

    // irrational omega = [0; 2, 10, 1, 1, ...]: the hole survives refinement, the circle's closes like 1/q
    const double golden = (std::sqrt(5.0) - 1) / 2;
    const double omega = 1.0 / (2.0 + 1.0 / (10.0 + 1.0 / (1.0 + golden)));
    const MatherSetApprox coarse = gap_measure(hs, omega, 25), fine = gap_measure(hs, omega, 300);
    CHECK(fine.q == 289);
    CHECK(fine.gap > 0.3);
    CHECK(std::abs(fine.gap - coarse.gap) < 1e-6);
    CHECK(fine.graph_ok);
    const MatherSetApprox round = gap_measure(hc, omega, 300);
    CHECK(round.degenerate);
    CHECK(round.gap == doctest::Approx(1.0 / 289).epsilon(1e-9));
}
