#pragma once

#include "billiards/fit.hpp"
#include "billiards/generating.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace billiards {

/// Periodic configuration of type (p, q): lifted points x_0..x_{q-1} with
/// x_{i+q} = x_i + p, action = sum_i h(x_i, x_{i+1}).
struct Configuration {
    int p = 0;
    int q = 1;
    std::vector<double> x;
    double action = 0.0;
    double residual = 0.0;  ///< sup |d2 h(x_{i-1}, x_i) + d1 h(x_i, x_{i+1})|
    int iterations = 0;
};

struct MinimizeOptions {
    int restarts = 4;
    std::uint64_t seed = 1;
    int max_iter = 200;
    double tol = 1e-9;  ///< stationarity residual
};

double configuration_action(const GeneratingFn& h, int p, const std::vector<double>& x);
/// d/dx_i of the action.
std::vector<double> configuration_gradient(const GeneratingFn& h, int p, const std::vector<double>& x);

/// Minimal (p, q) configuration: best of `restarts` damped-Newton runs from
/// stratified rigid-rotation starts, normalized so x_0 is the smallest point
/// mod 1, in [0, 1). Throws NoConvergence or OrderingCollapse.
Configuration minimal_configuration(const GeneratingFn& h, int p, int q, const MinimizeOptions& opts = {});

/// Continued-fraction convergents p_k/q_k of omega with q_k <= q_cap.
std::vector<std::pair<int, int>> convergents(double omega, int q_cap);

struct BetaOptions {
    int q_cap = 377;          ///< for irrational omega
    int max_rational_q = 2000;  ///< rationals with larger denominators go through convergents
    MinimizeOptions minimize{};
};

struct BetaValue {
    double omega = 0.0;
    double beta = 0.0;
    double err = 0.0;
    int p = 0, q = 1;  ///< last configuration used
};

/// Minimal average action at rotation number omega; beta(-omega) = beta(omega).
BetaValue beta_at(const GeneratingFn& h, double omega, const BetaOptions& opts = {});

struct BetaTable {
    std::vector<double> omega;
    std::vector<double> beta;
    std::vector<double> err;
    bool convex = false;
};

/// Includes omega = 0 with beta = 0; samples sorted by omega.
BetaTable beta_table(const GeneratingFn& h, std::vector<double> omegas, const BetaOptions& opts = {});
/// Midpoint convexity on sampled triples within tol.
bool is_convex(const std::vector<double>& x, const std::vector<double>& y, double tol = 1e-10);

struct AlphaTable {
    std::vector<double> c;
    std::vector<double> alpha;
    bool convex = false;
};

/// alpha(c) = max over samples of c omega - beta(omega), refined by a parabola through
/// the best sample and its neighbours. Throws OutOfSlopeRange outside the sampled slopes.
double alpha_from_beta(const BetaTable& table, double c);
AlphaTable alpha_table(const BetaTable& table, const std::vector<double>& cs);
/// Largest violation of c omega <= alpha(c) + beta(omega) over all sample pairs (<= 0 when it holds).
double fenchel_violation(const BetaTable& beta, const AlphaTable& alpha);

struct RotationEstimate {
    double omega = 0.0;
    double error = 0.0;
};

/// (x_N - x_0)/N refined by a smoothly weighted Birkhoff average of increments;
/// error bar from the spread over windows. Needs at least 100 points.
RotationEstimate rotation_number(const std::vector<double>& lifted);

struct MatherSetApprox {
    double omega = 0.0;
    int p = 0, q = 1;
    std::vector<double> points;   ///< x_i mod 1, sorted
    std::vector<double> momenta;  ///< -d1 h(x_i, x_{i+1}) for each sorted point
    double gap = 0.0;             ///< largest complementary interval
    double min_gap = 0.0;
    bool degenerate = false;      ///< all gaps equal: consistent with an invariant curve
    bool graph_ok = true;
};

MatherSetApprox gap_measure(const GeneratingFn& h, double omega, int q_cap, const MinimizeOptions& opts = {});

struct DegeneracyReport {
    PowerFit fit;
    bool cubic = false;  ///< slope >= 2.9
};

/// Log-log slope of beta over the positive samples with omega <= omega_max.
DegeneracyReport beta_degeneracy_check(const BetaTable& table, double omega_max = 0.05);

}  // namespace billiards
