#include "billiards/billiard.hpp"
#include "billiards/error.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace billiards;
using namespace billiards::testing;

namespace {

double wrap(double s) { return s - std::floor(s); }

double circular_distance(double a, double b)
{
    const double d = wrap(a - b);
    return std::min(d, 1.0 - d);
}

// Independent next-bounce oracle: march along the boundary, find where the
// outgoing ray crosses it, refine by bisection on the embedding only.
BilliardState brute_force_reflect(const BoundaryCurve& c, const BilliardState& st)
{
    const Vec2 p0 = c.point(st.s);
    const double theta = c.tangent_angle(st.s) + st.v;
    const Vec2 dir{std::cos(theta), std::sin(theta)};
    auto side = [&](double sigma) {
        const Vec2 p = c.point(sigma);
        return dir[0] * (p[1] - p0[1]) - dir[1] * (p[0] - p0[0]);
    };
    const int n = 20000;
    double lo = st.s + 1e-4, hi = lo;
    double f_lo = side(lo);
    for (int j = 1; j < n; ++j) {
        hi = st.s + 1e-4 + (1.0 - 2e-4) * j / n;
        const double f_hi = side(hi);
        if ((f_lo > 0) != (f_hi > 0))
            break;
        lo = hi;
        f_lo = f_hi;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((side(mid) > 0) == (f_lo > 0))
            lo = mid;
        else
            hi = mid;
    }
    const double s1 = 0.5 * (lo + hi);
    const Vec2 p1 = c.point(s1);
    const double chord_angle = std::atan2(p1[1] - p0[1], p1[0] - p0[0]);
    double v1 = c.tangent_angle(s1) - chord_angle;
    v1 -= 2 * kPi * std::floor(v1 / (2 * kPi));
    return {s1, v1};
}

}  // namespace

TEST_CASE("circle reflection is a rigid rotation")
{
    const BoundaryCurve c = build_curve(circle_profile());
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> us(0.0, 1.0), uv(1e-3, kPi - 1e-3);
    for (int i = 0; i < 1000; ++i) {
        const BilliardState st{us(rng), uv(rng)};
        const BilliardState next = reflect(c, st);
        CHECK(std::abs(next.s - (st.s + st.v / kPi)) < 1e-10);
        CHECK(std::abs(next.v - st.v) < 1e-10);
    }
}

TEST_CASE("normal chord on the symmetry axis bounces back")
{
    const BoundaryCurve c = build_curve(oval_profile());
    const BilliardState a = reflect(c, {0.0, kPi / 2});
    CHECK(std::abs(a.v - kPi / 2) < 1e-12);
    CHECK(circular_distance(a.s, 0.5) < 1e-12);
    const BilliardState b = reflect(c, a);
    CHECK(circular_distance(b.s, 0.0) < 1e-12);
}

TEST_CASE("oval reflection matches the brute-force intersection")
{
    const BoundaryCurve c = build_curve(oval_profile());
    for (BilliardState st : {BilliardState{0.0, 0.3}, BilliardState{0.21, 1.1}, BilliardState{0.77, 2.6}}) {
        const BilliardState fast = reflect(c, st);
        const BilliardState slow = brute_force_reflect(c, st);
        CHECK(circular_distance(fast.s, slow.s) < 1e-11);
        CHECK(std::abs(fast.v - slow.v) < 1e-9);
    }
}

TEST_CASE("degenerate tangency")
{
    const BoundaryCurve c = build_curve(oval_profile());
    try {
        reflect(c, {0.1, 1e-12});
        FAIL("expected DegenerateTangency");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateTangency);
    }
    CHECK_NOTHROW(reflect(c, {0.1, 1e-6}, ReflectOptions{1e-7}));
}

TEST_CASE("generating function on the circle")
{
    const BoundaryCurve c = build_curve(circle_profile());
    for (double gap : {0.01, 0.2, 0.5, 0.9}) {
        const ChordData d = generating_h(c, 0.3, 0.3 + gap);
        CHECK(std::abs(d.h + std::sin(kPi * gap) / kPi) < 1e-14);
        CHECK(std::abs(d.d1 - std::cos(kPi * gap)) < 1e-13);
        CHECK(std::abs(d.d2 + std::cos(kPi * gap)) < 1e-13);
    }
    try {
        generating_h(c, 0.4, 0.4);
        FAIL("expected CoincidentPoints");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CoincidentPoints);
    }
    CHECK_THROWS_AS(generating_h(c, 0.4, 1.4), Error);
}

TEST_CASE("generating partials against finite differences")
{
    for (const RadiusProfile& prof : {circle_profile(), oval_profile(), lopsided_profile()}) {
        const BoundaryCurve c = build_curve(prof);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> us(0.0, 1.0), ug(0.02, 0.95);
        for (int i = 0; i < 100; ++i) {
            const double s = us(rng);
            const double s1 = s + ug(rng);
            const ChordData d = generating_h(c, s, s1);
            const double e = 1e-5;
            auto h = [&](double a, double b) { return generating_h(c, a, b).h; };
            const double fd1 = (h(s + e, s1) - h(s - e, s1)) / (2 * e);
            const double fd2 = (h(s, s1 + e) - h(s, s1 - e)) / (2 * e);
            const double fd12 = (h(s + e, s1 + e) - h(s + e, s1 - e) - h(s - e, s1 + e) + h(s - e, s1 - e)) / (4 * e * e);
            CHECK(std::abs(fd1 - d.d1) < 1e-6 * std::max(1e-2, std::abs(d.d1)));
            CHECK(std::abs(fd2 - d.d2) < 1e-6 * std::max(1e-2, std::abs(d.d2)));
            CHECK(std::abs(fd1 - std::cos(d.v)) < 1e-6 * std::max(1e-2, std::abs(d.d1)));
            CHECK(std::abs(fd12 - d.d12) < 1e-4 * std::abs(d.d12));
            CHECK(-d.d12 > 0.0);
            const double fd11 = (generating_h(c, s + e, s1).d1 - generating_h(c, s - e, s1).d1) / (2 * e);
            const double fd22 = (generating_h(c, s, s1 + e).d2 - generating_h(c, s, s1 - e).d2) / (2 * e);
            CHECK(std::abs(fd11 - d.d11) < 1e-6 * std::max(1.0, std::abs(d.d11)));
            CHECK(std::abs(fd22 - d.d22) < 1e-6 * std::max(1.0, std::abs(d.d22)));
        }
    }
}

TEST_CASE("mixed partial relative error on random chords")
{
    const BoundaryCurve c = build_curve(oval_profile());
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> us(0.0, 1.0), ug(0.05, 0.9);
    for (int i = 0; i < 100; ++i) {
        const double s = us(rng);
        const double s1 = s + ug(rng);
        const double e = 1e-4;
        // d12 as the s-derivative of the analytic d2
        const double fd = (generating_h(c, s + e, s1).d2 - generating_h(c, s - e, s1).d2) / (2 * e);
        const double exact = generating_h(c, s, s1).d12;
        CHECK(std::abs(fd - exact) < 1e-6 * std::abs(exact));
    }
}

TEST_CASE("orbits")
{
    const BoundaryCurve circle = build_curve(circle_profile());
    CHECK(orbit(circle, {0.2, 0.4}, 0).size() == 1);
    for (auto [p, q] : {std::pair{1, 3}, std::pair{2, 5}, std::pair{3, 7}}) {
        const auto o = orbit(circle, {0.1, kPi * p / q}, q);
        CHECK(std::abs(o.back().s - (0.1 + p)) < 1e-12);
    }
    const BoundaryCurve oval = build_curve(oval_profile());
    const auto o = orbit(oval, {0.0, 0.2}, 10000);
    CHECK(o.size() == 10001);
    bool inside = true;
    for (const auto& st : o)
        inside = inside && st.v > 0.0 && st.v < kPi;
    CHECK(inside);
}

TEST_CASE("area preservation, reversibility and twist")
{
    const BoundaryCurve c = build_curve(lopsided_profile());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> us(0.0, 1.0), uv(0.05, kPi - 0.05);
    for (int i = 0; i < 50; ++i) {
        const BilliardState st{us(rng), uv(rng)};
        // (s, u = -cos v) coordinates
        auto image = [&](double s, double u) {
            const BilliardState n = reflect(c, {s, std::acos(-u)});
            return std::array<double, 2>{n.s, -std::cos(n.v)};
        };
        const double u0 = -std::cos(st.v);
        const double e = 1e-6;
        const auto sp = image(st.s + e, u0), sm = image(st.s - e, u0);
        const auto up = image(st.s, u0 + e), um = image(st.s, u0 - e);
        const double j11 = (sp[0] - sm[0]) / (2 * e), j21 = (sp[1] - sm[1]) / (2 * e);
        const double j12 = (up[0] - um[0]) / (2 * e), j22 = (up[1] - um[1]) / (2 * e);
        CHECK(std::abs(j11 * j22 - j12 * j21 - 1.0) < 1e-6);

        const BilliardState n = reflect(c, st);
        const BilliardState back = reflect(c, {n.s, kPi - n.v});
        CHECK(circular_distance(back.s, st.s) < 1e-9);
        CHECK(std::abs(back.v - (kPi - st.v)) < 1e-9);

        const double dv = 1e-6;
        CHECK(reflect(c, {st.s, st.v + dv}).s - reflect(c, {st.s, st.v - dv}).s > 0.0);
    }
}
