#include "billiards/generating.hpp"

namespace billiards {

GenPartials CubicGeneratingFn::eval(double x, double X) const
{
    const double gap = X - x;
    const double c2 = scale_ * scale_;
    GenPartials g;
    g.value = gap * gap * gap / (6.0 * c2);
    g.d1 = -gap * gap / (2.0 * c2);
    g.d2 = gap * gap / (2.0 * c2);
    g.d11 = gap / c2;
    g.d22 = gap / c2;
    g.d12 = -gap / c2;
    return g;
}

}  // namespace billiards
