#include "billiards/mather.hpp"

#include "billiards/error.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace billiards {

namespace {

double next_point(const std::vector<double>& x, int p, std::size_t i)
{
    return i + 1 < x.size() ? x[i + 1] : x[0] + p;
}

bool ordered(const std::vector<double>& x, int p)
{
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(next_point(x, p, i) > x[i]))
            return false;
    return true;
}

struct NewtonData {
    double action = 0.0;
    Eigen::VectorXd grad;
    Eigen::SparseMatrix<double> hess;
    double scale = 0.0;  ///< mean |diagonal|
};

NewtonData newton_data(const GeneratingFn& h, int p, const std::vector<double>& x)
{
    const int q = static_cast<int>(x.size());
    NewtonData d;
    d.grad = Eigen::VectorXd::Zero(q);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * q);
    for (int i = 0; i < q; ++i) {
        const int j = (i + 1) % q;
        const GenPartials g = h.eval(x[i], next_point(x, p, i));
        d.action += g.value;
        d.grad[i] += g.d1;
        d.grad[j] += g.d2;
        trip.emplace_back(i, i, g.d11);
        trip.emplace_back(j, j, g.d22);
        trip.emplace_back(i, j, g.d12);
        trip.emplace_back(j, i, g.d12);
    }
    d.hess.resize(q, q);
    d.hess.setFromTriplets(trip.begin(), trip.end());
    for (int i = 0; i < q; ++i)
        d.scale += std::abs(d.hess.coeff(i, i));
    d.scale /= q;
    return d;
}

// Shift indices and integers so x_0 is the smallest point mod 1 and lies in [0, 1).
void normalize(std::vector<double>& x, int p)
{
    const int q = static_cast<int>(x.size());
    int best = 0;
    double best_frac = 2.0;
    for (int i = 0; i < q; ++i) {
        const double f = x[i] - std::floor(x[i]);
        if (f < best_frac) {
            best_frac = f;
            best = i;
        }
    }
    std::vector<double> y(q);
    for (int k = 0; k < q; ++k) {
        const int i = (best + k) % q;
        y[k] = x[i] + (best + k >= q ? p : 0);
    }
    const double shift = std::floor(y[0]);
    for (double& v : y)
        v -= shift;
    x = std::move(y);
}

struct RunResult {
    std::vector<double> x;
    double action = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool minimum = false;
};

RunResult newton_run(const GeneratingFn& h, int p, std::vector<double> x, const MinimizeOptions& opts)
{
    const int q = static_cast<int>(x.size());
    NewtonData d = newton_data(h, p, x);
    double lambda = 0.0;
    RunResult r;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    Eigen::SparseMatrix<double> eye(q, q);
    eye.setIdentity();
    for (int it = 0; it < opts.max_iter; ++it) {
        r.iterations = it;
        const double gnorm = d.grad.cwiseAbs().maxCoeff();
        // stationary: stop once the Hessian is positive semidefinite there
        if (gnorm <= 1e-3 * opts.tol) {
            ldlt.compute(d.hess);
            const bool psd = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() >= -1e-10 * d.scale;
            r.minimum = psd;
            break;
        }
        Eigen::VectorXd step;
        for (int attempt = 0;; ++attempt) {
            ldlt.compute(lambda > 0.0 ? Eigen::SparseMatrix<double>(d.hess + lambda * eye) : d.hess);
            if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
                step = -ldlt.solve(d.grad);
                break;
            }
            lambda = std::max(4.0 * lambda, 1e-6 * d.scale);
            if (attempt > 60)
                throw Error(ErrorKind::NoConvergence, "Hessian regularization failed");
        }
        // projection onto ordered configurations by step halving
        std::vector<double> trial(q);
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            for (int i = 0; i < q; ++i)
                trial[i] = x[i] + step[i];
            if (ordered(trial, p)) {
                const NewtonData nd = newton_data(h, p, trial);
                const double slack = 1e-13 * std::abs(d.action) + 1e-300;
                if (nd.action <= d.action + slack || nd.grad.cwiseAbs().maxCoeff() < gnorm * 0.5) {
                    x = trial;
                    d = nd;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
            if (half == 59)
                break;
        }
        if (!accepted) {
            if (!ordered(trial, p) && lambda > 1e12 * d.scale)
                throw Error(ErrorKind::OrderingCollapse, "no ordered step available");
            lambda = std::max(4.0 * lambda, 1e-6 * d.scale);
        } else {
            lambda *= 0.25;
            if (lambda < 1e-12 * d.scale)
                lambda = 0.0;
        }
    }
    r.x = std::move(x);
    r.action = d.action;
    r.residual = d.grad.cwiseAbs().maxCoeff();
    return r;
}

}  // namespace

double configuration_action(const GeneratingFn& h, int p, const std::vector<double>& x)
{
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += h.eval(x[i], next_point(x, p, i)).value;
    return s;
}

std::vector<double> configuration_gradient(const GeneratingFn& h, int p, const std::vector<double>& x)
{
    const NewtonData d = newton_data(h, p, x);
    return {d.grad.data(), d.grad.data() + d.grad.size()};
}

Configuration minimal_configuration(const GeneratingFn& h, int p, int q, const MinimizeOptions& opts)
{
    if (q < 1 || p < 1 || std::gcd(p, q) != 1)
        throw Error(ErrorKind::InvalidInput, "need p, q >= 1 coprime");
    if (opts.restarts < 1)
        throw Error(ErrorKind::InvalidInput, "need at least one restart");
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Configuration best;
    best.action = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opts.restarts; ++r) {
        const double x0 = (r + unit(rng)) / (opts.restarts * static_cast<double>(q));
        std::vector<double> x(q);
        for (int i = 0; i < q; ++i)
            x[i] = x0 + static_cast<double>(i) * p / q;
        RunResult run = newton_run(h, p, x, opts);
        // a saddle: kick off the symmetric start and descend again
        for (int kick = 0; !run.minimum && kick < 6; ++kick) {
            std::vector<double> y = run.x;
            const double amp = 1e-3 / q;
            for (double& v : y)
                v += amp * (unit(rng) - 0.5);
            if (!ordered(y, p))
                continue;
            RunResult next = newton_run(h, p, y, opts);
            if (next.action <= run.action + 1e-13 * std::abs(run.action))
                run = std::move(next);
        }
        if (!(run.residual < opts.tol))
            continue;
        normalize(run.x, p);
        bool better = !std::isfinite(best.action);
        if (!better) {
            const double tie = 1e-13 * std::max(std::abs(run.action), std::abs(best.action));
            better = run.action < best.action - tie ||
                     (std::abs(run.action - best.action) <= tie && run.x[0] < best.x[0]);
        }
        if (better) {
            best.p = p;
            best.q = q;
            best.x = run.x;
            best.action = run.action;
            best.residual = run.residual;
            best.iterations = run.iterations;
        }
    }
    if (!std::isfinite(best.action))
        throw Error(ErrorKind::NoConvergence, "no restart reached stationarity for (" + std::to_string(p) + "," +
                                                  std::to_string(q) + ")");
    return best;
}

std::vector<std::pair<int, int>> convergents(double omega, int q_cap)
{
    std::vector<std::pair<int, int>> out;
    long long p0 = 1, q0 = 0, p1 = static_cast<long long>(std::floor(omega)), q1 = 1;
    double rest = omega - std::floor(omega);
    out.emplace_back(static_cast<int>(p1), 1);
    for (int k = 0; k < 64; ++k) {
        if (std::abs(omega - static_cast<double>(p1) / q1) <= 1e-15 * std::max(1.0, std::abs(omega)) || rest < 1e-15)
            break;
        const double inv = 1.0 / rest;
        const long long a = static_cast<long long>(std::floor(inv));
        rest = inv - a;
        const long long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > q_cap)
            break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        out.emplace_back(static_cast<int>(p1), static_cast<int>(q1));
    }
    return out;
}

BetaValue beta_at(const GeneratingFn& h, double omega, const BetaOptions& opts)
{
    BetaValue v;
    v.omega = omega;
    const double w = std::abs(omega);
    if (w == 0.0)
        return v;
    if (!(w < 1.0))
        throw Error(ErrorKind::InvalidInput, "rotation number must lie in (-1, 1)");
    const auto exact = convergents(w, opts.max_rational_q);
    const auto [pe, qe] = exact.back();
    if (pe > 0 && std::abs(w - static_cast<double>(pe) / qe) <= 1e-15 * w) {
        const Configuration c = minimal_configuration(h, pe, qe, opts.minimize);
        v.beta = c.action / qe;
        v.p = pe;
        v.q = qe;
        v.err = c.residual;
        return v;
    }
    auto conv = convergents(w, opts.q_cap);
    conv.erase(std::remove_if(conv.begin(), conv.end(), [](const auto& pq) { return pq.first < 1; }), conv.end());
    if (conv.empty())
        throw Error(ErrorKind::InvalidInput, "q_cap too small for this rotation number");
    std::vector<double> om, be;
    for (std::size_t k = conv.size() >= 3 ? conv.size() - 3 : 0; k < conv.size(); ++k) {
        const auto [p, q] = conv[k];
        om.push_back(static_cast<double>(p) / q);
        be.push_back(minimal_configuration(h, p, q, opts.minimize).action / q);
        v.p = p;
        v.q = q;
    }
    const std::size_t n = om.size();
    if (n == 1) {
        v.beta = be[0];
        v.err = std::abs(w - om[0]);
        return v;
    }
    // first-order extrapolation along the convergent sequence
    const double slope = (be[n - 1] - be[n - 2]) / (om[n - 1] - om[n - 2]);
    v.beta = be[n - 1] + slope * (w - om[n - 1]);
    double err = std::abs(v.beta - be[n - 1]);
    if (n == 3) {
        const double s0 = (be[1] - be[0]) / (om[1] - om[0]);
        err = std::max(err, std::abs((s0 - slope) * (w - om[n - 1])));
    }
    v.err = err;
    return v;
}

bool is_convex(const std::vector<double>& x, const std::vector<double>& y, double tol)
{
    // every sample lies on or below the chord of any pair around it
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 2; j < x.size(); ++j)
            for (std::size_t k = i + 1; k < j; ++k) {
                const double f = (x[k] - x[i]) / (x[j] - x[i]);
                if (y[k] > (1 - f) * y[i] + f * y[j] + tol)
                    return false;
            }
    return true;
}

BetaTable beta_table(const GeneratingFn& h, std::vector<double> omegas, const BetaOptions& opts)
{
    omegas.push_back(0.0);
    std::sort(omegas.begin(), omegas.end());
    omegas.erase(std::unique(omegas.begin(), omegas.end()), omegas.end());
    BetaTable t;
    for (double w : omegas) {
        const BetaValue v = beta_at(h, w, opts);
        t.omega.push_back(w);
        t.beta.push_back(v.beta);
        t.err.push_back(v.err);
    }
    t.convex = is_convex(t.omega, t.beta);
    return t;
}

double alpha_from_beta(const BetaTable& table, double c)
{
    const auto& w = table.omega;
    const auto& b = table.beta;
    const std::size_t n = w.size();
    if (n < 2)
        throw Error(ErrorKind::OutOfSlopeRange, "beta table too small");
    const double top = (b[n - 1] - b[n - 2]) / (w[n - 1] - w[n - 2]);
    const double bottom = (b[1] - b[0]) / (w[1] - w[0]);
    const bool symmetric = w[0] == 0.0;  // beta(-omega) = beta(omega) supplies the other side
    const double ac = symmetric ? std::abs(c) : c;
    if (ac > top || (!symmetric && c < bottom))
        throw Error(ErrorKind::OutOfSlopeRange, "slope outside the sampled range");
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (ac * w[i] - b[i] > ac * w[best] - b[best])
            best = i;
    const double g1 = ac * w[best] - b[best];
    if (best + 1 >= n || (best == 0 && !symmetric))
        return g1;
    const double x0 = best == 0 ? -w[1] : w[best - 1], g0 = best == 0 ? -ac * w[1] - b[1] : ac * x0 - b[best - 1];
    const double x1 = w[best], x2 = w[best + 1], g2 = ac * x2 - b[best + 1];
    // parabola through the three points, maximized on [x0, x2]
    const double d01 = (g1 - g0) / (x1 - x0), d12 = (g2 - g1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    if (!(curv < 0.0))
        return g1;
    const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    if (xv < x0 || xv > x2)
        return g1;
    return std::max(g1, g1 + d01 * (xv - x1) + curv * (xv - x0) * (xv - x1));
}

AlphaTable alpha_table(const BetaTable& table, const std::vector<double>& cs)
{
    AlphaTable a;
    a.c = cs;
    std::sort(a.c.begin(), a.c.end());
    for (double c : a.c)
        a.alpha.push_back(alpha_from_beta(table, c));
    a.convex = is_convex(a.c, a.alpha);
    return a;
}

double fenchel_violation(const BetaTable& beta, const AlphaTable& alpha)
{
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < beta.omega.size(); ++i)
        for (std::size_t j = 0; j < alpha.c.size(); ++j)
            worst = std::max(worst, alpha.c[j] * beta.omega[i] - alpha.alpha[j] - beta.beta[i]);
    return worst;
}

RotationEstimate rotation_number(const std::vector<double>& lifted)
{
    const std::size_t n = lifted.size();
    if (n < 100)
        throw Error(ErrorKind::InvalidInput, "rotation number needs at least 100 points");
    auto weighted = [&](std::size_t a, std::size_t b) {
        // exp(-1/(s(1-s))) weights on increments a..b-1
        double num = 0.0, den = 0.0;
        const double len = static_cast<double>(b - a);
        for (std::size_t k = a; k < b; ++k) {
            const double s = (k - a + 0.5) / len;
            const double wgt = std::exp(-1.0 / (s * (1.0 - s)));
            num += wgt * (lifted[k + 1] - lifted[k]);
            den += wgt;
        }
        return num / den;
    };
    RotationEstimate r;
    r.omega = weighted(0, n - 1);
    constexpr int kWindows = 8;
    const std::size_t len = (n - 1) / kWindows;
    double mean = 0.0, var = 0.0;
    std::vector<double> est;
    for (int k = 0; k < kWindows; ++k)
        est.push_back(weighted(k * len, (k + 1) * len));
    for (double e : est)
        mean += e / kWindows;
    for (double e : est)
        var += (e - mean) * (e - mean) / (kWindows - 1);
    r.error = std::sqrt(var / kWindows) + std::abs(mean - r.omega) / kWindows;
    return r;
}

MatherSetApprox gap_measure(const GeneratingFn& h, double omega, int q_cap, const MinimizeOptions& opts)
{
    if (!(omega > 0.0 && omega < 1.0))
        throw Error(ErrorKind::InvalidInput, "gap measure needs omega in (0, 1)");
    auto conv = convergents(omega, q_cap);
    conv.erase(std::remove_if(conv.begin(), conv.end(), [](const auto& pq) { return pq.first < 1; }), conv.end());
    if (conv.empty())
        throw Error(ErrorKind::InvalidInput, "q_cap too small for this rotation number");
    const auto [p, q] = conv.back();
    const Configuration c = minimal_configuration(h, p, q, opts);
    MatherSetApprox m;
    m.omega = omega;
    m.p = p;
    m.q = q;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
        const double mom = -h.eval(c.x[i], next_point(c.x, p, i)).d1;
        pts.emplace_back(c.x[i] - std::floor(c.x[i]), mom);
    }
    std::sort(pts.begin(), pts.end());
    m.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        m.points.push_back(pts[i].first);
        m.momenta.push_back(pts[i].second);
        const double next = i + 1 < pts.size() ? pts[i + 1].first : pts[0].first + 1.0;
        const double g = next - pts[i].first;
        m.gap = std::max(m.gap, g);
        m.min_gap = std::min(m.min_gap, g);
        if (g < 1e-9 && std::abs(pts[(i + 1) % pts.size()].second - pts[i].second) > 1e-4)
            m.graph_ok = false;
    }
    m.degenerate = m.gap - m.min_gap < 1e-9;
    return m;
}

DegeneracyReport beta_degeneracy_check(const BetaTable& table, double omega_max)
{
    std::vector<double> w, b;
    for (std::size_t i = 0; i < table.omega.size(); ++i)
        if (table.omega[i] > 0.0 && table.omega[i] <= omega_max) {
            w.push_back(table.omega[i]);
            b.push_back(table.beta[i]);
        }
    DegeneracyReport r;
    r.fit = fit_power_law(w, b);
    r.cubic = r.fit.slope >= 2.9;
    return r;
}

}  // namespace billiards
