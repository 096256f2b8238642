#pragma once

#include "billiards/boundary.hpp"

#include <vector>

namespace billiards {

/// Reflection point (arc length, lifted) and angle to the forward tangent.
struct BilliardState {
    double s;
    double v;
};

/// Geometry of the chord between two reflection points together with the
/// physical generating function h(s, s+) = -|P(s+) - P(s)| and its partials.
struct ChordData {
    double s = 0.0;
    double s_next = 0.0;  ///< lifted, s < s_next < s + 1
    double psi = 0.0;     ///< tangent angle at s
    double delta_psi = 0.0;
    double length = 0.0;
    double v = 0.0;
    double v_next = 0.0;
    double rho = 0.0;       ///< radius of curvature at s
    double rho_next = 0.0;  ///< radius of curvature at s_next
    double excess = 0.0;    ///< (s_next - s) - length, to full relative precision
    double h = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d11 = 0.0;
    double d12 = 0.0;
    double d22 = 0.0;
};

struct ReflectOptions {
    double v_min = 1e-9;
};

/// Chord leaving the point at tangent angle psi0 and spanning delta in psi.
ChordData chord_from_psi(const BoundaryCurve& curve, double psi0, double delta);

/// Chord solving for the outgoing angle v at tangent angle psi0.
ChordData reflect_from_psi(const BoundaryCurve& curve, double psi0, double v,
                           const ReflectOptions& opts = {});

BilliardState reflect(const BoundaryCurve& curve, const BilliardState& state,
                      const ReflectOptions& opts = {});

/// Throws CoincidentPoints when s and s_next agree modulo 1.
ChordData generating_h(const BoundaryCurve& curve, double s, double s_next);

std::vector<BilliardState> orbit(const BoundaryCurve& curve, const BilliardState& state, int n,
                                 const ReflectOptions& opts = {});

}  // namespace billiards
