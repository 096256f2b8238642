#pragma once

#include "billiards/fit.hpp"
#include "billiards/flow.hpp"
#include "billiards/smoothing.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace billiards {

/// Every stage of the suspension for one boundary: cutoff, modified map, H' table
/// and the smoothed Hamiltonian. Non-movable: stages refer to each other.
class SuspensionPipeline {
public:
    SuspensionPipeline(const LazutkinChart& chart, const SuspensionConfig& cfg);
    SuspensionPipeline(const SuspensionPipeline&) = delete;
    SuspensionPipeline& operator=(const SuspensionPipeline&) = delete;

    const LazutkinChart& chart() const { return *chart_; }
    const SuspensionConfig& config() const { return cfg_; }
    const CutoffGeneratingFn& cutoff() const { return cut_; }
    const ModifiedMap& modified_map() const { return map_; }
    const ModifiedGeneratingFn& modified_generating() const { return hphi_; }
    const SpectralTable& perturbation_table() const { return table_; }
    const PiecewiseHamiltonian& piecewise() const { return hat_; }
    const SmoothedHamiltonian& smoothed() const { return smooth_; }
    double build_seconds() const { return seconds_; }

private:
    std::chrono::steady_clock::time_point start_;
    const LazutkinChart* chart_;
    SuspensionConfig cfg_;
    CutoffGeneratingFn cut_;
    ModifiedMap map_;
    ModifiedGeneratingFn hphi_;
    double seconds_ = 0.0;
    SpectralTable table_;
    PiecewiseHamiltonian hat_;
    SmoothedHamiltonian smooth_;
};

struct ConjugationPoint {
    LazutkinState start;
    LazutkinState flow;
    LazutkinState map;
    double dx = 0.0;  ///< circle distance
    double dl = 0.0;
};

struct ConjugationReport {
    double sup_dx = 0.0;
    double sup_dl = 0.0;
    double sup_dl_rel = 0.0;  ///< sup |dl| / l
    double sup_error = 0.0;   ///< max(sup_dx, sup_dl)
    std::vector<ConjugationPoint> points;
};

struct SampleOptions {
    int points = 200;
    double l_min = 1e-5;
    double l_max = 1e-3;
    std::uint64_t seed = 1;
};

/// Time-1 flow of H from t = 0 against lazutkin_map at states with x uniform and
/// l log-uniform in [l_min, l_max].
ConjugationReport conjugation_check(const SuspendedHamiltonian& H, const LazutkinChart& chart,
                                    const SampleOptions& opts, const FlowOptions& flow_opts = {});

struct RemainderReport {
    PowerFit fit;          ///< slope of sup_{x,t} |H - K(l)| against l
    double max_scaled = 0.0;  ///< sup |H - K(l)| / l^{5/2}
    std::vector<double> l;
    std::vector<double> sup;
};

RemainderReport remainder_fit(const SuspendedHamiltonian& H, double l_min = 1e-6, double l_max = 1e-3, int nl = 13,
                              int nx = 16, int nt = 41);

/// sup over the grid of |H(x, l, t + 1) - H(x, l, t)|.
double periodicity_error(const SuspendedHamiltonian& H, double l_max = 1e-3);

/// Largest jump of the one-sided t-differences of H at the window edges
/// t1, t2, 1 - t2, 1 - t1, divided by l^{5/2}.
double time_derivative_jump(const SmoothedHamiltonian& H, double dt = 1e-5);

struct DriftReport {
    std::vector<double> widths;
    std::vector<double> sup;  ///< sup |V* - V^| over x, u, t in [kappa + m_w, 1/2]
    PowerFit fit;             ///< exponent of sup against m_w
    double linear_constant = 0.0;  ///< max sup / m_w
};

DriftReport drift_bound(const PiecewiseHamiltonian& hat, const std::vector<double>& widths);

/// Circulation of l dx - L dX around the ellipse (x0 + rx cos th, l0 + rl sin th)
/// under `map`, by trapezoid with spectral differentiation.
double loop_circulation(const std::function<LazutkinState(const LazutkinState&)>& map, const LazutkinState& center,
                        double rx, double rl, int n = 64);

struct MainTheoremReport {
    ConjugationReport conjugation;
    RemainderReport remainder;
    double periodicity = 0.0;
    double c1_jump = 0.0;
    PositivityReport positivity;
    ReconstructionReport reconstruction;  ///< worst of the four w tables
    LazutkinState boundary;               ///< image of (0.25, 0)
    double build_seconds = 0.0;
    double total_seconds = 0.0;
    bool conjugation_ok = false;
    bool remainder_ok = false;
    bool periodic_ok = false;
    bool positivity_ok = false;
    bool boundary_ok = false;
    bool passed() const { return conjugation_ok && remainder_ok && periodic_ok && positivity_ok && boundary_ok; }
};

struct MainTheoremOptions {
    SampleOptions sample{};
    double conjugation_tol = 1e-5;
    double exponent_target = 2.5;
    double exponent_tol = 0.1;
};

/// Builds the pipeline and runs the checks. Configuration errors propagate;
/// a failed positivity check is recorded, not thrown.
MainTheoremReport verify_main_theorem(const LazutkinChart& chart, const SuspensionConfig& cfg,
                                      const MainTheoremOptions& opts = {});
MainTheoremReport verify_main_theorem(const SuspensionPipeline& pipeline, const MainTheoremOptions& opts = {});

}  // namespace billiards
