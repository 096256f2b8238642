#include "billiards/quadrature.hpp"

#include "billiards/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>

namespace billiards::quad {

const GaussRule& gauss_rule()
{
    static const GaussRule rule = [] {
        using Boost = boost::math::quadrature::gauss<double, GaussRule::kNodes>;
        GaussRule r;
        const auto& x = Boost::abscissa();
        const auto& w = Boost::weights();
        // Boost stores the non-negative half of a symmetric even rule.
        static_assert(GaussRule::kNodes % 2 == 0);
        const std::size_t half = GaussRule::kNodes / 2;
        for (std::size_t i = 0; i < half; ++i) {
            r.nodes[half - 1 - i] = -x[i];
            r.weights[half - 1 - i] = w[i];
            r.nodes[half + i] = x[i];
            r.weights[half + i] = w[i];
        }
        return r;
    }();
    return rule;
}

namespace {

struct Adaptive {
    const std::function<double(double)>& f;
    double rel_tol;
    double abs_tol;
    int max_depth;
    int deepest = 0;

    double refine(double a, double b, double whole, double scale, int depth, double& err)
    {
        deepest = std::max(deepest, depth);
        const double mid = 0.5 * (a + b);
        const double left = gauss(f, a, mid);
        const double right = gauss(f, mid, b);
        const double diff = std::abs(left + right - whole);
        const double target = std::max(abs_tol, rel_tol * scale);
        if (diff <= target || diff <= 8.0 * std::numeric_limits<double>::epsilon() * std::abs(whole)) {
            err += diff;
            return left + right;
        }
        if (depth >= max_depth)
            throw Error(ErrorKind::QuadratureStall,
                        "adaptive quadrature exceeded " + std::to_string(max_depth) + " levels");
        return refine(a, mid, left, scale, depth + 1, err) + refine(mid, b, right, scale, depth + 1, err);
    }
};

}  // namespace

AdaptiveResult adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                              double rel_tol, double abs_tol, int max_depth)
{
    AdaptiveResult out;
    if (a == b)
        return out;
    Adaptive engine{f, rel_tol, abs_tol, max_depth};
    const double whole = gauss(f, a, b);
    double err = 0.0;
    out.value = engine.refine(a, b, whole, std::abs(whole), 1, err);
    out.error = err;
    out.depth = engine.deepest;
    return out;
}

}  // namespace billiards::quad
