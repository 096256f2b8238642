#include "billiards/error.hpp"
#include "billiards/flow.hpp"
#include "billiards/modified_map.hpp"
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

/// Autonomous H = K(l) + a l^{5/2} sin(2 pi x).
class FrozenHamiltonian final : public SuspendedHamiltonian {
public:
    explicit FrozenHamiltonian(double a) : a_(a) {}
    Perturbation perturbation(double x, double l, double) const override
    {
        const double u = std::sqrt(l), s = std::sin(2 * kPi * x);
        return {a_ * l * l * u * s, a_ * l * l * u * 2 * kPi * std::cos(2 * kPi * x), 2.5 * a_ * l * u * s,
                3.75 * a_ * u * s};
    }

private:
    double a_;
};

class KineticOnly final : public SuspendedHamiltonian {
public:
    Perturbation perturbation(double, double, double) const override { return {}; }
};

struct OvalSuspension {
    LazutkinChart chart{build_curve(oval_profile())};
    CutoffGeneratingFn cut{chart, 1e-3};
    ModifiedMap map{cut, 0.15};
    ModifiedGeneratingFn hphi{map};
    SpectralTable table = build_perturbation_table(hphi, SuspensionConfig{});
    PiecewiseHamiltonian hat{table, 0.15};
    NonperiodicHamiltonian prime{table, 1 - 2 * 0.15};
};

const OvalSuspension& oval()
{
    static const auto s = std::make_unique<OvalSuspension>();
    return *s;
}

}  // namespace

TEST_CASE("kinetic flow is a rigid shear")
{
    const KineticOnly k;
    for (double l : {1e-8, 1e-4, 0.02}) {
        const LazutkinState s{0.3, l};
        const auto out = flow_samples(k, s, 0.1, {0.1, 0.4, 1.1});
        REQUIRE(out.size() == 3);
        for (const auto& p : out) {
            CHECK(p.state.x == doctest::Approx(0.3 + std::sqrt(2 * l) * (p.t - 0.1)).epsilon(1e-13));
            CHECK(p.state.l == l);
            // w + K(l0)(t - t0) = 0 for a kinetic flow
            CHECK(std::abs(p.action) < 1e-13 * std::pow(l, 1.5));
        }
    }
    CHECK(flow(k, {0.4, 0.0}, 0, 1).x == 0.4);
    CHECK(flow(k, {0.4, 0.0}, 0, 1).l == 0.0);
    CHECK_THROWS_AS(flow(k, {0.4, 1e-3}, 1, 0), Error);
}

TEST_CASE("energy is conserved by an autonomous flow")
{
    const FrozenHamiltonian H(0.8);
    for (double l : {1e-5, 1e-3, 0.05}) {
        for (double x : {0.1, 0.6}) {
            const LazutkinState s{x, l};
            const LazutkinState e = flow(H, s, 0, 1);
            const double e0 = H.value(s.x, s.l, 0), e1 = H.value(e.x, e.l, 1);
            CHECK(std::abs(e1 - e0) < 1e-10 * e0);
            CHECK(std::abs(e1 - e0) < 1e-10);
        }
    }
}

TEST_CASE("mixed generating action of the flow")
{
    // dw/dX = L - l along the flow endpoint: compare two nearby starts with the same l0
    const FrozenHamiltonian H(0.8);
    const double l0 = 2e-3, x0 = 0.21, dx = 1e-5;
    auto w_at = [&](double x) {
        const auto s = flow_samples(H, {x, l0}, 0, {1.0}).back();
        return std::pair{s, s.action - kinetic(l0)};
    };
    const auto [a, wa] = w_at(x0 - dx);
    const auto [b, wb] = w_at(x0 + dx);
    const auto [m, wm] = w_at(x0);
    const double dw_dX = (wb - wa) / (b.state.x - a.state.x);
    CHECK(dw_dX == doctest::Approx(m.state.l - l0).epsilon(1e-5));
}

TEST_CASE("out of domain raises StepUnderflow")
{
    const OvalSuspension& o = oval();
    try {
        flow(o.hat, {0.2, 0.01}, 0, 1);
        FAIL("expected StepUnderflow");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepUnderflow);
    }
}

TEST_CASE("H' characteristics are straight lines")
{
    const OvalSuspension& o = oval();
    for (double x : {0.07, 0.42, 0.8})
        for (double gap : {0.005, 0.02, 0.04}) {
            const double X = x + gap;
            const double l = o.hphi.solve_action(x, X);
            const auto out = flow_samples(o.prime, {x, l}, 0, {0.25, 0.5, 0.75, 1.0});
            for (const auto& p : out)
                CHECK(std::abs(p.state.x - (x + gap * p.t)) < 1e-8);
        }
}

TEST_CASE("piecewise Hamiltonian interpolates the billiard map")
{
    const OvalSuspension& o = oval();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ux(0, 1), ul(std::log(1e-6), std::log(1e-3));
    double sup_x = 0, sup_l = 0;
    for (int i = 0; i < 200; ++i) {
        const LazutkinState s{ux(rng), std::exp(ul(rng))};
        const LazutkinState a = flow(o.hat, s, 0, 1);
        const LazutkinState b = lazutkin_map(o.chart, s);
        sup_x = std::max(sup_x, circle_gap(a.x, b.x));
        sup_l = std::max(sup_l, std::abs(a.l - b.l) / s.l);
    }
    CHECK(sup_x < 1e-6);
    CHECK(sup_l < 1e-5);

    // kinetic on [0, kappa) and continuity across the junction
    const LazutkinState s{0.31, 4e-4};
    const auto out = flow_samples(o.hat, s, 0, {0.1, 0.15, 1.0});
    CHECK(out[0].state.x == doctest::Approx(0.31 + std::sqrt(8e-4) * 0.1).epsilon(1e-13));
    CHECK(out[0].state.l == s.l);
    const LazutkinState left = out[1].state;
    const LazutkinState right = flow(o.hat, left, 0.15, 1.0);
    CHECK(circle_gap(right.x, out[2].state.x) < 1e-12);
    CHECK(right.l == doctest::Approx(out[2].state.l).epsilon(1e-12));

    // the wall is invariant
    const LazutkinState w = flow(o.hat, {0.5, 0.0}, 0, 1);
    CHECK(w.x == 0.5);
    CHECK(w.l == 0.0);
}
