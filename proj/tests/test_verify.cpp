#include "billiards/error.hpp"
#include "billiards/verify.hpp"
#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <memory>

using namespace billiards;
using namespace billiards::testing;

namespace {

struct CirclePipeline {
    LazutkinChart chart{build_curve(circle_profile())};
    SuspensionPipeline pipe{chart, SuspensionConfig{}};
};

const CirclePipeline& circle()
{
    static const auto p = std::make_unique<CirclePipeline>();
    return *p;
}

}  // namespace

TEST_CASE("main theorem on the circle")
{
    const CirclePipeline& c = circle();
    const MainTheoremReport r = verify_main_theorem(c.pipe);
    MESSAGE("sup error " << r.conjugation.sup_error << ", exponent " << r.remainder.fit.slope << ", positivity "
                         << r.positivity.min_ratio << ", seconds " << r.total_seconds);
    CHECK(r.conjugation.points.size() == 200);
    CHECK(r.conjugation.sup_error < 1e-5);
    CHECK(r.remainder.fit.slope == doctest::Approx(2.5).epsilon(0.04));
    CHECK(r.periodicity == 0.0);
    CHECK(r.positivity.min_ratio > 1.0);
    CHECK(r.reconstruction.residual < 1e-5);
    CHECK(r.boundary.x == 0.25);
    CHECK(r.boundary.l == 0.0);
    CHECK(r.passed());
}

TEST_CASE("main theorem rejects kappa beyond 1/5")
{
    SuspensionConfig cfg = SuspensionConfig::with_defaults(0.3, 0.05);
    const LazutkinChart& chart = circle().chart;
    try {
        verify_main_theorem(chart, cfg);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
}

TEST_CASE("time-1 maps are exact symplectic")
{
    const CirclePipeline& c = circle();
    const SmoothedHamiltonian& H = c.pipe.smoothed();
    const LazutkinState center{0.3, 4e-4};
    const double billiard = loop_circulation([&](const LazutkinState& s) { return lazutkin_map(c.chart, s); },
                                             center, 0.05, 1e-4);
    const double smooth = loop_circulation([&](const LazutkinState& s) { return flow(H, s, 0.0, 1.0); }, center,
                                           0.05, 1e-4);
    // l dx alone encloses about pi * rx * rl = 1.6e-5
    const double area = loop_circulation([](const LazutkinState& s) { return LazutkinState{s.x + 0.1, 0.0}; },
                                         center, 0.05, 1e-4);
    CHECK(std::abs(area + std::acos(-1.0) * 0.05 * 1e-4) < 1e-15);
    CHECK(std::abs(billiard) < 1e-8);
    CHECK(std::abs(smooth) < 1e-8);
}

TEST_CASE("mollification drift is bounded linearly in the width")
{
    const CirclePipeline& c = circle();
    const DriftReport d = drift_bound(c.pipe.piecewise(), {0.01, 0.02, 0.04});
    MESSAGE("drift exponent " << d.fit.slope << ", constant " << d.linear_constant);
    for (std::size_t i = 0; i < d.widths.size(); ++i)
        CHECK(d.sup[i] <= d.linear_constant * d.widths[i] * (1 + 1e-12));
    CHECK(d.fit.slope >= 1.0);
}

TEST_CASE("remainder of the piecewise Hamiltonian")
{
    const CirclePipeline& c = circle();
    const RemainderReport r = remainder_fit(c.pipe.piecewise());
    CHECK(r.fit.slope == doctest::Approx(2.5).epsilon(0.04));
    CHECK(r.max_scaled < 10.0);
    CHECK(time_derivative_jump(c.pipe.smoothed()) < 0.05);
}
