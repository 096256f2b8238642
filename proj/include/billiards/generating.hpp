#pragma once

namespace billiards {

/// Value and partial derivatives of a two-point generating function h(x, X).
struct GenPartials {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d11 = 0.0;
    double d12 = 0.0;
    double d22 = 0.0;
};

/// Generating function of an exact monotone twist map on lifted coordinates
/// x < X: the map sends (x, -d1 h) to (X, d2 h).
class GeneratingFn {
public:
    virtual ~GeneratingFn() = default;

    virtual GenPartials eval(double x, double X) const = 0;

    /// Mixed partial only; overridden where it is cheaper than eval().
    virtual double d12(double x, double X) const { return eval(x, X).d12; }

    /// c such that h(x, X) ~ (X - x)^3 / (6 c^2) for X -> x.
    virtual double cubic_scale() const { return 1.0; }
};

/// h(x, X) = (X - x)^3 / (6 c^2): the integrable reference.
class CubicGeneratingFn final : public GeneratingFn {
public:
    explicit CubicGeneratingFn(double scale = 1.0) : scale_(scale) {}

    GenPartials eval(double x, double X) const override;
    double d12(double x, double X) const override { return -(X - x) / (scale_ * scale_); }
    double cubic_scale() const override { return scale_; }

private:
    double scale_;
};

}  // namespace billiards
