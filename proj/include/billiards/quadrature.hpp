#pragma once

#include "billiards/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

namespace billiards::quad {

/// Gauss-Legendre rule with kNodes nodes on [-1, 1].
struct GaussRule {
    static constexpr std::size_t kNodes = 20;
    std::array<double, kNodes> nodes{};
    std::array<double, kNodes> weights{};
};

const GaussRule& gauss_rule();

/// Fixed composite Gauss-Legendre over [a, b] split into `panels` equal panels.
template <class F>
double gauss(F&& f, double a, double b, int panels = 1)
{
    const GaussRule& rule = gauss_rule();
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double half = 0.5 * width;
        const double mid = lo + half;
        double sum = 0.0;
        for (std::size_t i = 0; i < GaussRule::kNodes; ++i)
            sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += half * sum;
    }
    return total;
}

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    int depth = 0;
};

/// Adaptive Gauss-Legendre: a panel is accepted when its value agrees with the
/// sum over its two halves to `rel_tol` (relative to the running total) or to
/// `abs_tol`. Throws QuadratureStall past `max_depth` bisection levels.
AdaptiveResult adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                              double rel_tol = 1e-10, double abs_tol = 0.0, int max_depth = 20);

/// Vector-valued adaptive Gauss-Legendre; each component must meet the
/// tolerance relative to its own magnitude on the whole interval.
template <std::size_t N>
struct AdaptiveVector {
    std::array<double, N> value{};
    int depth = 0;
};

template <std::size_t N, class F>
AdaptiveVector<N> adaptive_gauss_n(F&& f, double a, double b, double rel_tol = 1e-10,
                                   std::array<double, N> abs_tol = {}, int max_depth = 20)
{
    using Vec = std::array<double, N>;
    const GaussRule& rule = gauss_rule();
    auto panel = [&](double lo, double hi) {
        Vec sum{};
        const double half = 0.5 * (hi - lo), mid = lo + half;
        for (std::size_t i = 0; i < GaussRule::kNodes; ++i) {
            const Vec v = f(mid + half * rule.nodes[i]);
            for (std::size_t k = 0; k < N; ++k)
                sum[k] += rule.weights[i] * v[k];
        }
        for (double& s : sum)
            s *= half;
        return sum;
    };
    AdaptiveVector<N> out;
    if (a == b)
        return out;
    const Vec whole = panel(a, b);
    Vec scale;
    for (std::size_t k = 0; k < N; ++k)
        scale[k] = std::max(abs_tol[k], rel_tol * std::abs(whole[k]));
    std::function<Vec(double, double, const Vec&, int)> refine = [&](double lo, double hi, const Vec& w, int depth) {
        out.depth = std::max(out.depth, depth);
        const double mid = 0.5 * (lo + hi);
        const Vec left = panel(lo, mid), right = panel(mid, hi);
        bool ok = true;
        Vec total;
        for (std::size_t k = 0; k < N; ++k) {
            total[k] = left[k] + right[k];
            const double diff = std::abs(total[k] - w[k]);
            ok = ok && (diff <= scale[k] || diff <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(w[k]));
        }
        if (ok)
            return total;
        if (depth >= max_depth)
            throw Error(ErrorKind::QuadratureStall,
                        "adaptive quadrature exceeded " + std::to_string(max_depth) + " levels");
        const Vec l = refine(lo, mid, left, depth + 1), r = refine(mid, hi, right, depth + 1);
        for (std::size_t k = 0; k < N; ++k)
            total[k] = l[k] + r[k];
        return total;
    };
    out.value = refine(a, b, whole, 1);
    return out;
}

}  // namespace billiards::quad
