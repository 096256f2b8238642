#pragma once

#include "billiards/generating.hpp"

#include <vector>

namespace billiards {

/// L(x,v,t) = -int_0^v (v - eta) d12 h(x - eta t, x + eta (1 - t)) d eta, whose
/// Euler-Lagrange flow is straight lines with time-1 map generated by h.
/// Values are split as cubic part v^3/(6 c^2) plus a perturbation computed
/// from d12 h + eta / c^2, so small-v values keep their relative accuracy.
class InterpolatingLagrangian {
public:
    explicit InterpolatingLagrangian(const GeneratingFn& h, double rel_tol = 1e-10);

    struct Values {
        double L = 0.0;
        double Lv = 0.0;
        double Lvv = 0.0;
        double L_pert = 0.0;   ///< L - v^3/(6 c^2)
        double Lv_pert = 0.0;  ///< Lv - v^2/(2 c^2)
    };

    /// All values at once; v >= 0, t in [0, 1]. Throws QuadratureStall.
    Values evaluate(double x, double v, double t) const;

    double value(double x, double v, double t) const { return evaluate(x, v, t).L; }
    double momentum(double x, double v, double t) const { return evaluate(x, v, t).Lv; }
    /// -d12 h(x - v t, x + v (1 - t)), no quadrature.
    double stiffness(double x, double v, double t) const;

    double cubic_scale() const { return c_; }
    const GeneratingFn& generating() const { return *h_; }

private:
    const GeneratingFn* h_;
    double c_;
    double rel_tol_;
};

struct LegendreResult {
    double H = 0.0;       ///< max_v (v l - L)
    double H_pert = 0.0;  ///< H - (2 sqrt 2 / 3) c l^{3/2}
    double v = 0.0;       ///< maximizer, equals dH/dl
    double Hll = 0.0;     ///< 1 / L_vv at the maximizer
};

/// H(x,l,t) = max_v {v l - L(x,v,t)} by bracketed Newton on L_v = l.
/// Throws InversionFail when no bracket exists.
LegendreResult legendre_hamiltonian(const InterpolatingLagrangian& lag, double x, double l, double t,
                                    double tol = 1e-14);

struct PathMinimum {
    double action = 0.0;
    double max_bend = 0.0;  ///< sup |gamma(t_k) - (x + (X - x) t_k)|
    std::vector<double> path;
    int iterations = 0;
};

/// Minimizes int_0^1 L(gamma, gamma', t) dt over piecewise-linear paths with
/// `segments` pieces from x to X, starting from a bent path.
PathMinimum minimize_path_action(const InterpolatingLagrangian& lag, double x, double X, int segments = 50,
                                 double initial_bend = 1e-3);

}  // namespace billiards
