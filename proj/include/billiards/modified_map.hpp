#pragma once

#include "billiards/cutoff.hpp"
#include "billiards/generating.hpp"
#include "billiards/lazutkin.hpp"

namespace billiards {

/// psi^kappa(x, l) = (x + kappa sqrt(2l), l).
LazutkinState shear(double kappa, const LazutkinState& s);
/// Generating value of psi^kappa: (sqrt(2) kappa / 3) l^{3/2}.
double shear_action(double kappa, double l);

/// One step of a twist map together with its Jacobian and generating value.
struct TwistStep {
    LazutkinState next;
    MapJacobian jac;
    GenPartials partials;  ///< generating function at (x, next.x)
};

/// The map generated by the cutoff function; coincides with lazutkin_map
/// whenever the step stays below the cutoff gap.
TwistStep cutoff_step(const CutoffGeneratingFn& h, const LazutkinState& s);

/// psi^{-kappa} o phi o psi^{-kappa} with phi the cutoff map.
class ModifiedMap {
public:
    ModifiedMap(const CutoffGeneratingFn& h, double kappa);

    /// next, Jacobian, and partials.value = S of the composition in (x, X).
    TwistStep step(const LazutkinState& s) const;
    LazutkinState operator()(const LazutkinState& s) const { return step(s).next; }

    double kappa() const { return kappa_; }
    const CutoffGeneratingFn& base() const { return *h_; }

private:
    const CutoffGeneratingFn* h_;
    double kappa_;
};

/// Generating function of the modified map, h_phi(x, X) = S(x, l*(x, X)).
class ModifiedGeneratingFn final : public GeneratingFn {
public:
    explicit ModifiedGeneratingFn(const ModifiedMap& map) : map_(&map) {}

    GenPartials eval(double x, double X) const override;
    double cubic_scale() const override { return 1.0 - 2.0 * map_->kappa(); }

    /// Action l* with map(x, l*).x = X.
    double solve_action(double x, double X) const;

private:
    struct Solution {
        double l;
        TwistStep step;
    };
    const ModifiedMap* map_;
    Solution solve(double x, double X) const;
};

}  // namespace billiards
