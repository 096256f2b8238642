#pragma once

#include "billiards/bump.hpp"
#include "billiards/generating.hpp"
#include "billiards/lazutkin.hpp"

namespace billiards {

/// h = (X-x)^3/6 + R(x,X) tau(X-x), R = h~ - (X-x)^3/6, with tau = 1 for gaps up
/// to gap_lo and 0 from gap_hi = sqrt(gap_lo) on. `epsilon` is an action level;
/// gap_lo = 2 sqrt(2 epsilon) leaves every orbit with l <= epsilon untouched.
class CutoffGeneratingFn final : public GeneratingFn {
public:
    CutoffGeneratingFn(const LazutkinChart& chart, double epsilon);

    GenPartials eval(double x, double X) const override;

    double epsilon() const { return epsilon_; }
    double gap_lo() const { return transition_.lo; }
    double gap_hi() const { return transition_.hi; }
    const LazutkinGeneratingFn& base() const { return base_; }

    /// min of -d12 h / (X - x) over the sampled (x, gap) grid with gaps in (0, gap_hi].
    double twist_constant(int nx = 16, int ngap = 64) const;

private:
    LazutkinGeneratingFn base_;
    double epsilon_;
    Transition transition_;
};

}  // namespace billiards
