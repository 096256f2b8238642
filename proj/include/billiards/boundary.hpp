#pragma once

#include <array>
#include <vector>

namespace billiards {

using Vec2 = std::array<double, 2>;

/// Radius of curvature as a trigonometric polynomial of the tangent angle psi:
///   r(psi) = cos[0] + sum_{k>=2} cos[k] cos(k psi) + sin[k] sin(k psi).
/// Frequency-1 coefficients must vanish (closure of the curve).
struct RadiusProfile {
    std::vector<double> cos;
    std::vector<double> sin;

    int max_frequency() const;
    double coefficient_cos(int k) const;
    double coefficient_sin(int k) const;

    double value(double psi) const;
    /// n-th derivative in psi (n = 0, 1, 2).
    double derivative(double psi, int n) const;

    /// Throws NonConvex / ClosureViolation / InvalidInput.
    void validate() const;

    /// Trigonometric interpolation of `samples` taken on a uniform grid
    /// psi_j = 2 pi j / N; keeps frequencies below N/2.
    static RadiusProfile from_samples(const std::vector<double>& samples, int max_frequency);
};

/// Strictly convex closed curve with unit perimeter, parametrized internally
/// by the tangent angle psi. All queries are closed-form in psi; arc length is
/// inverted by safeguarded Newton. s = 0 sits at psi = 0 and the curve is
/// centered on its Steiner point, so a circle reads P(s) = R (sin 2 pi s, -cos 2 pi s).
class BoundaryCurve {
public:
    explicit BoundaryCurve(RadiusProfile profile);

    const RadiusProfile& profile() const { return profile_; }
    /// Uniform factor applied to the profile so that the perimeter is 1.
    double scale() const { return scale_; }

    // --- psi-parametrized queries (psi lifted to R) ---
    double radius_at_psi(double psi) const { return scale_ * profile_.value(psi); }
    double radius_derivative_psi(double psi, int n) const { return scale_ * profile_.derivative(psi, n); }
    double arclength_at_psi(double psi) const;
    Vec2 point_at_psi(double psi) const;
    /// Chord P(psi0 + delta) - P(psi0) resolved in the frame of the tangent at
    /// psi0, accurate to full relative precision for small delta.
    struct ChordFrame {
        double tangential;
        double normal;
        double arc;     ///< arc length between the endpoints
        double excess;  ///< arc - chord length
    };
    ChordFrame chord_in_tangent_frame(double psi0, double delta) const;
    /// Arc length between psi0 and psi0 + delta.
    double arc_between(double psi0, double delta) const;

    // --- arc-length queries (s lifted to R, period 1) ---
    double tangent_angle(double s) const;
    Vec2 point(double s) const;
    double radius_of_curvature(double s) const;
    /// d rho / ds and d^2 rho / ds^2.
    double radius_ds(double s) const;
    double radius_dss(double s) const;

    double min_radius() const { return min_radius_; }

private:
    struct Term {
        int m;
        double c;
        double d;
    };

    RadiusProfile profile_;
    double scale_ = 1.0;
    double min_radius_ = 0.0;
    std::vector<Term> x_terms_;
    std::vector<Term> y_terms_;
    Vec2 center_{0.0, 0.0};  // Steiner point: mean of P over the tangent angle
    int panel_count(double delta) const;
};

BoundaryCurve build_curve(const RadiusProfile& profile);

}  // namespace billiards
