#pragma once

namespace billiards {

/// Normalized C-infinity bump exp(-1/(1-s^2)) supported on |s| < 1 with unit
/// mass, and the smoothstep obtained by integrating it.
class Bump {
public:
    static const Bump& instance();

    double value(double s) const;
    double derivative(double s) const;
    double second_derivative(double s) const;

    /// Mollifier eta_w(t) = eta(t/w)/w of half-width w.
    double mollifier(double t, double width) const { return value(t / width) / width; }
    double mollifier_derivative(double t, double width) const
    {
        return derivative(t / width) / (width * width);
    }

    /// Smoothstep on [0,1]: 0 for z <= 0, 1 for z >= 1, C-infinity in between.
    double step(double z) const;
    double step_derivative(double z) const { return 2.0 * value(2.0 * z - 1.0); }
    double step_second_derivative(double z) const { return 4.0 * derivative(2.0 * z - 1.0); }

    double normalization() const { return norm_; }

private:
    Bump();
    double raw(double s) const;
    double norm_;
};

/// Smooth transition equal to 1 on (-inf, lo] and 0 on [hi, inf).
struct Transition {
    double lo;
    double hi;

    double value(double t) const;
    double derivative(double t) const;
    double second_derivative(double t) const;
};

}  // namespace billiards
