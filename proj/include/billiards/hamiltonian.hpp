#pragma once

#include "billiards/modified_map.hpp"
#include "billiards/spectral_table.hpp"

#include <vector>

namespace billiards {

/// (2 sqrt 2 / 3) l^{3/2} and its first two l-derivatives.
double kinetic(double l);
double kinetic_l(double l);
double kinetic_ll(double l);
/// K(a) - K(b) without cancellation.
double kinetic_difference(double a, double b);

struct SuspensionConfig {
    double kappa = 0.15;            ///< shear time
    double epsilon = 1e-3;          ///< cutoff action level
    double mollifier_width = 0.05;  ///< m_w
    double t1 = 0.2;                ///< blend window start
    double t2 = 0.25;               ///< blend window end
    double quad_tol = 1e-10;
    double ode_tol = 1e-11;
    double legendre_tol = 1e-14;
    double table_action_factor = 2.0;  ///< tables cover l in [0, factor * epsilon]
    int table_nx = 48;
    int table_nu = 6;
    int table_nt = 4;
    int w_nx = 48;
    int w_nu = 8;
    int w_nt = 6;
    int jobs = 1;

    /// Defaults t1 = kappa + m_w, t2 = t1 + kappa / 3 for the given kappa and m_w.
    static SuspensionConfig with_defaults(double kappa, double mollifier_width);
    /// Throws ConfigError on violated constraints.
    void validate() const;
    double action_max() const { return table_action_factor * epsilon; }
};

/// Time-dependent Hamiltonian H = k K(l) + H_p(x, l, t) with K the kinetic term;
/// the split keeps the small perturbation at full relative precision in flows.
struct Perturbation {
    double value = 0.0;
    double x = 0.0;
    double l = 0.0;
    double ll = 0.0;
};

class SuspendedHamiltonian {
public:
    virtual ~SuspendedHamiltonian() = default;

    virtual double kinetic_scale() const { return 1.0; }
    virtual Perturbation perturbation(double x, double l, double t) const = 0;
    /// Times where the Hamiltonian may jump; flows restart there.
    virtual std::vector<double> breakpoints() const { return {}; }

    double value(double x, double l, double t) const;
    double d_l(double x, double l, double t) const;
    double d_x(double x, double l, double t) const;
    double d_ll(double x, double l, double t) const;
};

/// l^{5/2} T and its x- and l-derivatives from the table partials d at u = sqrt l.
Perturbation perturbation_from(const TableDerivs& d, double u);

/// l^{5/2} T(x, sqrt l, tau) and its derivatives from a table in u = sqrt l.
Perturbation table_perturbation(const SpectralTable& table, double x, double l, double tau);

/// Table of V'(x, u, tau) = (H'(x, u^2, tau) - (2 sqrt 2/3) c u^3) / u^5, tau in [0, 1],
/// H' the Legendre transform of the interpolating Lagrangian of h.
SpectralTable build_perturbation_table(const GeneratingFn& h, const SuspensionConfig& cfg);

/// H'(x, l, tau) on tau in [0, 1]: time-1 map is the modified map.
class NonperiodicHamiltonian final : public SuspendedHamiltonian {
public:
    NonperiodicHamiltonian(const SpectralTable& vprime, double scale) : table_(&vprime), scale_(scale) {}

    double kinetic_scale() const override { return scale_; }
    Perturbation perturbation(double x, double l, double t) const override;

private:
    const SpectralTable* table_;
    double scale_;
};

/// H^ on t in [0, 1]: kinetic on [0, kappa) and (1 - kappa, 1], H'(., ., (t - kappa)/c) / c between.
class PiecewiseHamiltonian final : public SuspendedHamiltonian {
public:
    PiecewiseHamiltonian(const SpectralTable& vprime, double kappa) : table_(&vprime), kappa_(kappa) {}

    Perturbation perturbation(double x, double l, double t) const override;
    std::vector<double> breakpoints() const override { return {kappa_, 1.0 - kappa_}; }
    double kappa() const { return kappa_; }
    const SpectralTable& table() const { return *table_; }

private:
    const SpectralTable* table_;
    double kappa_;
};

}  // namespace billiards
