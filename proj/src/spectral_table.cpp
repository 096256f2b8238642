#include "billiards/spectral_table.hpp"

#include "billiards/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <mutex>
#include <thread>

namespace billiards {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double cheb_node(int i, int n) { return std::cos(kPi * (i + 0.5) / n); }

// Chebyshev coefficients from values at Gauss nodes, applied along a stride.
void chebyshev_transform(double* data, int n, std::size_t stride, std::vector<double>& scratch)
{
    scratch.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += data[i * stride] * std::cos(kPi * j * (i + 0.5) / n);
        scratch[j] = (j == 0 ? 1.0 : 2.0) * acc / n;
    }
    for (int j = 0; j < n; ++j)
        data[j * stride] = scratch[j];
}

}  // namespace

void chebyshev_basis(double z, int n, double* t0, double* t1, double* t2)
{
    if (n <= 0)
        return;
    t0[0] = 1.0;
    t1[0] = 0.0;
    t2[0] = 0.0;
    if (n == 1)
        return;
    t0[1] = z;
    t1[1] = 1.0;
    t2[1] = 0.0;
    for (int j = 1; j + 1 < n; ++j) {
        t0[j + 1] = 2.0 * z * t0[j] - t0[j - 1];
        t1[j + 1] = 2.0 * t0[j] + 2.0 * z * t1[j] - t1[j - 1];
        t2[j + 1] = 4.0 * t1[j] + 2.0 * z * t2[j] - t2[j - 1];
    }
}

SpectralTable::SpectralTable(int nx, int nu, int nt, double u_max, double t_lo, double t_hi)
    : nx_(nx), nu_(nu), nt_(nt), u_max_(u_max), t_lo_(t_lo), t_hi_(t_hi)
{
    if (nx < 2 || nx % 2 != 0 || nu < 1 || nt < 1 || !(u_max > 0.0) || !(t_hi > t_lo))
        throw Error(ErrorKind::InvalidInput, "bad spectral table shape");
    kx_ = 1 + 2 * (nx / 2 - 1);
    coef_.assign(static_cast<std::size_t>(kx_) * nu_ * nt_, 0.0);
}

double SpectralTable::x_node(int i) const { return static_cast<double>(i) / nx_; }
double SpectralTable::u_node(int i) const { return 0.5 * u_max_ * (cheb_node(i, nu_) + 1.0); }
double SpectralTable::t_node(int i) const
{
    return t_lo_ + 0.5 * (t_hi_ - t_lo_) * (cheb_node(i, nt_) + 1.0);
}

void SpectralTable::fit(const Sampler& f, int jobs)
{
    std::vector<double> values(static_cast<std::size_t>(nx_) * nu_ * nt_);
    auto work = [&](int first) {
        for (int iu = first; iu < nu_; iu += jobs)
            for (int ix = 0; ix < nx_; ++ix)
                for (int it = 0; it < nt_; ++it)
                    values[(static_cast<std::size_t>(ix) * nu_ + iu) * nt_ + it] = f(x_node(ix), u_node(iu), t_node(it));
    };
    jobs = std::clamp(jobs, 1, nu_);
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex lock;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&, j] {
                try {
                    work(j);
                } catch (...) {
                    std::lock_guard<std::mutex> g(lock);
                    if (!failure)
                        failure = std::current_exception();
                }
            });
        for (auto& th : pool)
            th.join();
        if (failure)
            std::rethrow_exception(failure);
    }
    fit_values(values);
}

void SpectralTable::fit_values(const std::vector<double>& values)
{
    if (values.size() != static_cast<std::size_t>(nx_) * nu_ * nt_)
        throw Error(ErrorKind::InvalidInput, "spectral table value count mismatch");
    std::vector<double> work = values;
    std::vector<double> scratch;
    // t then u: Chebyshev along strides 1 and nt
    for (int ix = 0; ix < nx_; ++ix) {
        for (int iu = 0; iu < nu_; ++iu)
            chebyshev_transform(&work[(static_cast<std::size_t>(ix) * nu_ + iu) * nt_], nt_, 1, scratch);
        for (int it = 0; it < nt_; ++it)
            chebyshev_transform(&work[static_cast<std::size_t>(ix) * nu_ * nt_ + it], nu_, nt_, scratch);
    }
    // x: real Fourier series, Nyquist term dropped
    const int half = nx_ / 2;
    for (int j = 0; j < nu_; ++j) {
        for (int m = 0; m < nt_; ++m) {
            auto sample = [&](int ix) { return work[(static_cast<std::size_t>(ix) * nu_ + j) * nt_ + m]; };
            double mean = 0.0;
            for (int ix = 0; ix < nx_; ++ix)
                mean += sample(ix);
            c(0, j, m) = mean / nx_;
            for (int k = 1; k < half; ++k) {
                double a = 0.0, b = 0.0;
                for (int ix = 0; ix < nx_; ++ix) {
                    const double ang = kTwoPi * k * ix / nx_;
                    a += sample(ix) * std::cos(ang);
                    b += sample(ix) * std::sin(ang);
                }
                c(2 * k - 1, j, m) = 2.0 * a / nx_;
                c(2 * k, j, m) = 2.0 * b / nx_;
            }
        }
    }
}

void SpectralTable::time_basis(double t, std::vector<double>& b, std::vector<double>& b_dot) const
{
    b.assign(nt_, 0.0);
    b_dot.assign(nt_, 0.0);
    std::vector<double> second(nt_);
    const double scale = 2.0 / (t_hi_ - t_lo_);
    chebyshev_basis(scale * (t - t_lo_) - 1.0, nt_, b.data(), b_dot.data(), second.data());
    for (double& d : b_dot)
        d *= scale;
}

TableDerivs SpectralTable::eval(double x, double u, double t) const
{
    std::vector<double> b, bd;
    time_basis(t, b, bd);
    return contract(x, u, b, bd);
}

TableDerivs SpectralTable::eval_with_time_basis(double x, double u, const std::vector<double>& b,
                                                const std::vector<double>& b_dot) const
{
    if (static_cast<int>(b.size()) != nt_ || static_cast<int>(b_dot.size()) != nt_)
        throw Error(ErrorKind::InvalidInput, "time basis size mismatch");
    return contract(x, u, b, b_dot);
}

TableDerivs SpectralTable::contract(double x, double u, const std::vector<double>& tb,
                                    const std::vector<double>& tbd) const
{
    // Fourier basis and its first two derivatives
    std::vector<double> f0(kx_), f1(kx_), f2(kx_);
    f0[0] = 1.0;
    f1[0] = f2[0] = 0.0;
    for (int k = 1; 2 * k < kx_ + 1; ++k) {
        const double w = kTwoPi * k;
        const double cs = std::cos(w * x), sn = std::sin(w * x);
        f0[2 * k - 1] = cs;
        f1[2 * k - 1] = -w * sn;
        f2[2 * k - 1] = -w * w * cs;
        f0[2 * k] = sn;
        f1[2 * k] = w * cs;
        f2[2 * k] = -w * w * sn;
    }
    std::vector<double> g0(nu_), g1(nu_), g2(nu_);
    const double su = 2.0 / u_max_;
    chebyshev_basis(su * u - 1.0, nu_, g0.data(), g1.data(), g2.data());
    for (int j = 0; j < nu_; ++j) {
        g1[j] *= su;
        g2[j] *= su * su;
    }

    TableDerivs d;
    for (int k = 0; k < kx_; ++k) {
        double a0 = 0.0, a1 = 0.0, a2 = 0.0;  // u-orders 0,1,2 at t-order 0
        double b0 = 0.0, b1 = 0.0, b2 = 0.0;  // same at t-order 1
        for (int j = 0; j < nu_; ++j) {
            const double* row = &coef_[(static_cast<std::size_t>(k) * nu_ + j) * nt_];
            double s0 = 0.0, s1 = 0.0;
            for (int m = 0; m < nt_; ++m) {
                s0 += row[m] * tb[m];
                s1 += row[m] * tbd[m];
            }
            a0 += g0[j] * s0;
            a1 += g1[j] * s0;
            a2 += g2[j] * s0;
            b0 += g0[j] * s1;
            b1 += g1[j] * s1;
            b2 += g2[j] * s1;
        }
        d.v += f0[k] * a0;
        d.x += f1[k] * a0;
        d.xx += f2[k] * a0;
        d.u += f0[k] * a1;
        d.xu += f1[k] * a1;
        d.uu += f0[k] * a2;
        d.xuu += f1[k] * a2;
        d.t += f0[k] * b0;
        d.xt += f1[k] * b0;
        d.ut += f0[k] * b1;
        d.uut += f0[k] * b2;
    }
    return d;
}

SpectralTable SpectralTable::mirrored() const
{
    SpectralTable out = *this;
    for (int k = 0; k < kx_; ++k)
        for (int j = 0; j < nu_; ++j)
            for (int m = 0; m < nt_; ++m) {
                double sign = (m % 2 == 0) ? 1.0 : -1.0;
                if (k > 0 && k % 2 == 0)
                    sign = -sign;  // sine terms
                out.c(k, j, m) *= sign;
            }
    return out;
}

double SpectralTable::tail_ratio() const
{
    double top = 0.0, tail = 0.0;
    for (int k = 0; k < kx_; ++k)
        for (int j = 0; j < nu_; ++j)
            for (int m = 0; m < nt_; ++m) {
                const double a = std::abs(coef_[(static_cast<std::size_t>(k) * nu_ + j) * nt_ + m]);
                top = std::max(top, a);
                const bool in_tail = (k + 1) * 3 > 2 * kx_ || (j + 1) * 3 > 2 * nu_ || (m + 1) * 3 > 2 * nt_;
                if (in_tail && nu_ > 2 && nt_ > 2)
                    tail = std::max(tail, a);
            }
    return top > 0.0 ? tail / top : 0.0;
}

}  // namespace billiards
