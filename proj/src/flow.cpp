#include "billiards/flow.hpp"

#include "billiards/error.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace billiards {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 3>;

// Scaled variables about the unperturbed kinetic motion from (x0, l0):
// x = x0 + k sqrt(2 l0)(t - t0) + l0^{3/2} q0, l = l0 + l0^{5/2} q1,
// action = l0^{5/2} q2.
struct Scaled {
    const SuspendedHamiltonian& H;
    double x0, l0, t0, k, s1, s2, v0;

    double x(const State& q, double t) const { return x0 + k * v0 * (t - t0) + s1 * q[0]; }
    double l(const State& q) const { return l0 + s2 * q[1]; }

    void operator()(const State& q, State& dq, double t) const
    {
        const double lt = l(q);
        if (!(lt > 0.0))
            throw Error(ErrorKind::StepUnderflow, "trajectory reached l <= 0");
        const Perturbation p = H.perturbation(x(q, t), lt, t);
        const double vt = std::sqrt(2.0 * lt);
        const double xdot = k * vt + p.l;
        dq[0] = (k * 2.0 * s2 * q[1] / (vt + v0) + p.l) / s1;
        dq[1] = -p.x / s2;
        dq[2] = q[1] * xdot - (k * kinetic_difference(lt, l0) + p.value) / s2;
    }
};

std::vector<double> segment_ends(const SuspendedHamiltonian& H, double t0, double t1)
{
    std::vector<double> ends;
    for (double b : H.breakpoints()) {
        // breakpoints repeat with period 1
        for (double k = std::floor(t0); k <= std::ceil(t1); k += 1.0) {
            const double tb = b + k;
            if (tb > t0 && tb < t1)
                ends.push_back(tb);
        }
    }
    ends.push_back(t1);
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    return ends;
}

}  // namespace

std::vector<FlowSample> flow_samples(const SuspendedHamiltonian& H, const LazutkinState& s, double t0,
                                     const std::vector<double>& times, const FlowOptions& opts)
{
    std::vector<FlowSample> out;
    if (times.empty())
        return out;
    if (!std::is_sorted(times.begin(), times.end()) || times.front() < t0)
        throw Error(ErrorKind::InvalidInput, "sample times must be sorted and not before t0");
    if (!(s.l >= 0.0))
        throw Error(ErrorKind::InvalidInput, "negative action");
    if (s.l == 0.0) {
        // the boundary circle is invariant and carries no action
        for (double t : times)
            out.push_back({t, {s.x, 0.0}, 0.0});
        return out;
    }
    const double k = H.kinetic_scale();
    const Scaled sys{H, s.x, s.l, t0, k, s.l * std::sqrt(s.l), s.l * s.l * std::sqrt(s.l), std::sqrt(2.0 * s.l)};
    auto stepper = odeint::make_controlled(opts.tol, opts.tol, odeint::runge_kutta_dopri5<State>());

    State q{0.0, 0.0, 0.0};
    double t = t0;
    std::size_t next = 0;
    auto record = [&](double when) { out.push_back({when, {sys.x(q, when), sys.l(q)}, sys.s2 * q[2]}); };
    while (next < times.size() && times[next] == t0)
        record(times[next++]);
    std::vector<double> stops = segment_ends(H, t0, times.back());
    stops.insert(stops.end(), times.begin() + static_cast<std::ptrdiff_t>(next), times.end());
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    try {
        for (double stop : stops) {
            if (stop > t)
                odeint::integrate_adaptive(stepper, sys, q, t, stop, std::min(opts.first_step, stop - t));
            t = stop;
            while (next < times.size() && times[next] == t)
                record(times[next++]);
        }
    } catch (const odeint::odeint_error& e) {
        throw Error(ErrorKind::StepUnderflow, std::string("step control failed: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::StepUnderflow)
            throw;
        throw Error(ErrorKind::StepUnderflow, std::string("trajectory left the domain: ") + e.what());
    }
    return out;
}

LazutkinState flow(const SuspendedHamiltonian& H, const LazutkinState& s, double t0, double t1,
                   const FlowOptions& opts)
{
    if (t1 < t0)
        throw Error(ErrorKind::InvalidInput, "flow runs forward in time");
    if (t1 == t0)
        return s;
    return flow_samples(H, s, t0, {t1}, opts).back().state;
}

}  // namespace billiards
