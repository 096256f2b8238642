#pragma once

#include <vector>

namespace billiards {

struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0;
    int used = 0;
};

/// Least-squares slope of log|y| against log x. Points with |y| <= floor are
/// dropped; throws FitUnstable when fewer than `min_points` remain.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y, double floor = 0.0,
                       int min_points = 4);

}  // namespace billiards
