#pragma once

#include "billiards/bump.hpp"
#include "billiards/hamiltonian.hpp"

#include <memory>
#include <vector>

namespace billiards {

/// H* = H^ convolved in t with the mollifier of half-width m_w.
class MollifiedHamiltonian final : public SuspendedHamiltonian {
public:
    MollifiedHamiltonian(const PiecewiseHamiltonian& hat, double width);

    Perturbation perturbation(double x, double l, double t) const override;

    /// M_m(t) = int_kappa^{1-kappa} T_m(z((r - kappa)/c)) eta(t - r) dr and d/dt,
    /// T_m the Chebyshev time basis of the table; Hermite-interpolated from a fine grid.
    void time_basis(double t, std::vector<double>& b, std::vector<double>& b_dot) const;
    /// The same by direct quadrature; `order` 0, 1, 2 selects the t-derivative.
    void time_basis_direct(double t, int order, std::vector<double>& b) const;
    double width() const { return width_; }
    const PiecewiseHamiltonian& hat() const { return *hat_; }

private:
    const PiecewiseHamiltonian* hat_;
    double width_;
    double grid_lo_ = 0.0, grid_step_ = 0.0;
    int grid_n_ = 0;
    std::vector<double> m0_, m1_, m2_;  // index i * nt + m
};

/// Partials of w_p = w + K(l) t, the part of a mixed generating function beyond
/// the kinetic term.
struct WPartials {
    double v = 0.0;
    double X = 0.0;
    double XX = 0.0;
    double l = 0.0;
    double ll = 0.0;
    double Xl = 0.0;
    double Xll = 0.0;
    double t = 0.0;
    double Xt = 0.0;
    double tl = 0.0;
    double tll = 0.0;
};

/// Mixed generating function S = X l + w(X, l, t) of the flow map phi_H^t from
/// time 0 (dw/dX = L - l, dw/dl = x - X), tabulated as w_p / l^{5/2} over
/// t in [t_lo, t_hi].
class GeneratingW {
public:
    GeneratingW(const SuspendedHamiltonian& H, const SuspensionConfig& cfg, double t_lo, double t_hi);

    WPartials partials(double X, double l, double t) const;
    double value(double X, double l, double t) const;
    double d_X(double X, double l, double t) const { return partials(X, l, t).X; }
    double d_l(double X, double l, double t) const;

    /// Action l of the flow start that lands on (X, L) at time t.
    double start_action(double X, double L, double t) const;
    /// H(X, L, t) = -w_t(X, l, t).
    double reconstruct(double X, double L, double t) const;
    /// H(X, L, t) = -int_0^l w_tl (1 + w_lX) dzeta, the form with the extra Jacobian factor.
    double reconstruct_jacobian_form(double X, double L, double t) const;

    const SpectralTable& table() const { return table_; }
    double action_max() const { return table_.u_max() * table_.u_max(); }

private:
    SpectralTable table_;
};

struct ReconstructionReport {
    double residual = 0.0;           ///< sup |H_rec - H| / H with H_rec = -w_t
    double jacobian_residual = 0.0;  ///< same with the extra-factor form
    double l_at_jacobian_max = 0.0;
};

/// Relative reconstruction error on off-node interior points with l in [l_min, epsilon].
ReconstructionReport reconstruction_check(const GeneratingW& w, const SuspendedHamiltonian& H,
                                          const SuspensionConfig& cfg, double l_min = 1e-6);

/// Builds w and throws GridTooCoarse when the reconstruction residual exceeds tol.
GeneratingW generating_w(const SuspendedHamiltonian& H, const SuspensionConfig& cfg, double t_lo, double t_hi,
                         double tol = 1e-5);

/// One half of the smoothed construction, for t in [0, 1/2].
class SmoothedHalf {
public:
    SmoothedHalf(const SpectralTable& vprime, const SuspensionConfig& cfg);
    SmoothedHalf(const SmoothedHalf&) = delete;
    SmoothedHalf& operator=(const SmoothedHalf&) = delete;

    /// H*: t < t1; blended generating function: t1 <= t <= t2; H^: t > t2.
    Perturbation perturbation(double x, double l, double t) const;

    /// Partials of w~_p on [t1, t2] with the xi' terms included in t-derivatives.
    WPartials blended(double X, double l, double t) const;
    double xi(double t) const { return xi_.value(t); }
    double xi_dot(double t) const { return xi_.derivative(t); }

    const PiecewiseHamiltonian& hat() const { return hat_; }
    const MollifiedHamiltonian& star() const { return star_; }
    const GeneratingW& w_hat() const { return w_hat_; }
    const GeneratingW& w_star() const { return w_star_; }
    const SuspensionConfig& config() const { return cfg_; }

private:
    SuspensionConfig cfg_;
    SpectralTable table_;
    PiecewiseHamiltonian hat_;
    MollifiedHamiltonian star_;
    Transition xi_;
    GeneratingW w_hat_;
    GeneratingW w_star_;
};

/// H~: first half from vprime, second half by mirroring (x, t) -> (-x, 1 - t)
/// of the construction applied to the mirrored table. Time-1 periodic.
class SmoothedHamiltonian final : public SuspendedHamiltonian {
public:
    SmoothedHamiltonian(const SpectralTable& vprime, const SuspensionConfig& cfg);

    Perturbation perturbation(double x, double l, double t) const override;
    std::vector<double> breakpoints() const override;

    const SmoothedHalf& first() const { return *first_; }
    const SmoothedHalf& second() const { return *second_; }
    const SuspensionConfig& config() const { return first_->config(); }

private:
    std::unique_ptr<SmoothedHalf> first_;
    std::unique_ptr<SmoothedHalf> second_;
};

struct PositivityReport {
    double min_ratio = 0.0;  ///< min of R * 2 sqrt(l); the bound R > 1/(2 sqrt l) means > 1
    double x = 0.0, l = 0.0, t = 0.0;
    bool second_half = false;
};

/// R = -(xi'(w*_ll - w^_ll) + (1 - xi) w^_tll + xi w*_tll) / (1 + w~_Xl) on a grid over
/// t in [t1, t2], l log-spaced in [l_min, epsilon], for both halves. Throws
/// PositivityViolation when R <= 1/(2 sqrt l) anywhere.
PositivityReport positivity_check(const SmoothedHamiltonian& H, int nx = 32, int nl = 24, int nt = 24,
                                  double l_min = 1e-7);
/// The same grid minimum without the throw.
PositivityReport positivity_scan(const SmoothedHamiltonian& H, int nx = 32, int nl = 24, int nt = 24,
                                 double l_min = 1e-7);

}  // namespace billiards
