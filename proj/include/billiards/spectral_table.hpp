#pragma once

#include <functional>
#include <vector>

namespace billiards {

/// Partial derivatives of a table T(x, u, t) returned by one evaluation.
struct TableDerivs {
    double v = 0.0;
    double x = 0.0;
    double u = 0.0;
    double t = 0.0;
    double xx = 0.0;
    double xu = 0.0;
    double uu = 0.0;
    double xuu = 0.0;
    double xt = 0.0;
    double ut = 0.0;
    double uut = 0.0;
};

/// Tensor interpolant on T x [0, u_max] x [t_lo, t_hi]: Fourier in x (period 1),
/// Chebyshev in u and t, sampled at Chebyshev-Gauss nodes (endpoints are never
/// sampled).
class SpectralTable {
public:
    using Sampler = std::function<double(double x, double u, double t)>;

    SpectralTable() = default;
    SpectralTable(int nx, int nu, int nt, double u_max, double t_lo, double t_hi);

    /// Fill from samples at the nodes; rows in u are distributed over `jobs` threads.
    void fit(const Sampler& f, int jobs = 1);
    /// Fill from precomputed node values, index (ix * nu + iu) * nt + it.
    void fit_values(const std::vector<double>& values);

    int nx() const { return nx_; }
    int nu() const { return nu_; }
    int nt() const { return nt_; }
    double u_max() const { return u_max_; }
    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }

    double x_node(int i) const;
    double u_node(int i) const;
    double t_node(int i) const;

    TableDerivs eval(double x, double u, double t) const;
    double value(double x, double u, double t) const { return eval(x, u, t).v; }

    /// Evaluate with a caller-supplied time basis: b[m] and b_dot[m] replace
    /// T_m(z(t)) and its t-derivative (used for convolutions in t).
    TableDerivs eval_with_time_basis(double x, double u, const std::vector<double>& b,
                                     const std::vector<double>& b_dot) const;

    /// Chebyshev polynomials T_m(z(t)) and d/dt of them for this table's window.
    void time_basis(double t, std::vector<double>& b, std::vector<double>& b_dot) const;

    /// Table of T(-x, u, t_lo + t_hi - t).
    SpectralTable mirrored() const;

    /// Largest coefficient magnitude in the trailing third of each direction,
    /// relative to the largest coefficient overall.
    double tail_ratio() const;

    const std::vector<double>& coefficients() const { return coef_; }

private:
    int nx_ = 0, nu_ = 0, nt_ = 0;
    int kx_ = 0;  // real Fourier basis size: 1 + 2 * (nx/2 - 1)
    double u_max_ = 1.0, t_lo_ = 0.0, t_hi_ = 1.0;
    std::vector<double> coef_;  // index (k * nu + j) * nt + m

    double& c(int k, int j, int m) { return coef_[(static_cast<std::size_t>(k) * nu_ + j) * nt_ + m]; }
    TableDerivs contract(double x, double u, const std::vector<double>& tb, const std::vector<double>& tbd) const;
};

/// Chebyshev T_j(z), T_j'(z), T_j''(z) for j < n.
void chebyshev_basis(double z, int n, double* t0, double* t1, double* t2);

}  // namespace billiards
