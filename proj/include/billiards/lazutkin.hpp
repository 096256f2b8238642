#pragma once

#include "billiards/billiard.hpp"
#include "billiards/boundary.hpp"
#include "billiards/fit.hpp"
#include "billiards/generating.hpp"

#include <vector>

namespace billiards {

/// Lazutkin action-angle pair; l = y^2 / 2.
struct LazutkinState {
    double x;
    double l;
};

/// Jacobian of a planar map (x, l) -> (X, L).
struct MapJacobian {
    double xx = 1.0;  ///< dX/dx
    double xl = 0.0;  ///< dX/dl
    double lx = 0.0;  ///< dL/dx
    double ll = 1.0;  ///< dL/dl
};

/// The change of variables s -> x = C1 * int_0^s rho^{-2/3},
/// v -> y = 4 C1 rho^{1/3} sin(v/2). Immutable; owns a copy of the curve.
class LazutkinChart {
public:
    explicit LazutkinChart(BoundaryCurve curve, int panels = 512);

    const BoundaryCurve& curve() const { return curve_; }
    double c1() const { return c1_; }

    double x_of_psi(double psi) const;
    double psi_of_x(double x) const;
    /// C1 * integral of rho^{1/3} d psi over [psi0, psi0 + delta].
    double x_increment(double psi0, double delta) const;
    /// delta with x_increment(psi0, delta) = gap.
    double delta_for_x_gap(double psi0, double gap) const;

    double x_of_s(double s) const { return x_of_psi(curve_.tangent_angle(s)); }
    double s_of_x(double x) const { return curve_.arclength_at_psi(psi_of_x(x)); }

    /// ds/dx and d^2 s/dx^2 at the point with tangent angle psi.
    double ds_dx(double psi) const;
    double d2s_dx2(double psi) const;

    double l_of(double rho, double v) const;

    LazutkinState to_lazutkin(const BilliardState& state) const;
    /// Throws InvalidInput when l exceeds the chart (sin(v/2) > 1).
    BilliardState from_lazutkin(const LazutkinState& state) const;

    /// Sum of squared-table checksum used in chart summaries.
    double table_checksum() const;

private:
    BoundaryCurve curve_;
    int panels_;
    double width_;
    double c1_;
    std::vector<double> cumulative_;  // integral of rho^{1/3} d psi at panel starts
    double cbrt_radius(double psi) const;
};

/// Below this action the map returns the boundary limit (x, 0) unchanged in x.
inline constexpr double kLazutkinMinAction = 1e-14;

struct LazutkinStep {
    LazutkinState next;
    ChordData chord;
    bool boundary = false;  ///< true when l fell below kLazutkinMinAction
};

LazutkinStep lazutkin_step(const LazutkinChart& chart, const LazutkinState& state,
                           const ReflectOptions& opts = {});
LazutkinState lazutkin_map(const LazutkinChart& chart, const LazutkinState& state,
                           const ReflectOptions& opts = {});

/// Generating function h~ = 4 C1^2 int_x^X rho^{2/3}(s(tau)) d tau + 4 C1^3 h(s, s+),
/// evaluated as 4 C1^3 ((s+ - s) - |P(s+) - P(s)|).
GenPartials lazutkin_partials(const LazutkinChart& chart, const ChordData& chord);

class LazutkinGeneratingFn final : public GeneratingFn {
public:
    explicit LazutkinGeneratingFn(const LazutkinChart& chart) : chart_(&chart) {}

    GenPartials eval(double x, double X) const override;
    const LazutkinChart& chart() const { return *chart_; }

private:
    const LazutkinChart* chart_;
};

/// Jacobian of a twist map from the second partials of its generating function
/// at (x, X).
MapJacobian twist_map_jacobian(const GenPartials& g);

/// Coefficients of s+ = s + a1 v + a2 v^2 + a3 v^3 + O(v^4),
/// v+ = v + b2 v^2 + b3 v^3 + O(v^4), rho the radius of curvature.
struct ExpansionCoeffs {
    double alpha1;
    double alpha2;
    double alpha3;
    double beta2;
    double beta3;
};

ExpansionCoeffs expansion_coeffs(const BoundaryCurve& curve, double s);

struct ExpansionReport {
    PowerFit s_fit;
    PowerFit v_fit;
    bool v_exact = false;  ///< v+ residual identically zero (circle)
    bool s_exact = false;
    std::vector<double> s_residuals;
    std::vector<double> v_residuals;
};

/// Log-log slopes of |s+_exact - s+_series| and |v+_exact - v+_series|.
ExpansionReport verify_expansion_order(const BoundaryCurve& curve, double s, const std::vector<double>& v_seq);

/// Log-log slope of |h~(x, x + gap) - gap^3/6| over the given gaps.
PowerFit tilde_h_remainder_order(const LazutkinChart& chart, double x, const std::vector<double>& gaps);

}  // namespace billiards
