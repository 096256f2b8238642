#include "app.hpp"

#include "billiards/billiard.hpp"
#include "billiards/error.hpp"
#include "billiards/lagrangian.hpp"
#include "billiards/lazutkin.hpp"
#include "billiards/mather.hpp"
#include "billiards/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace billiards;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// pinned tolerances
constexpr double kReflectTol = 1e-10;
constexpr double kReflectSeconds = 1.0;
constexpr double kPartialRelTol = 1e-6;
constexpr double kMinSlope = 3.9;
constexpr double kExpansionSeconds = 10.0;
constexpr double kCubicTol = 1e-10;
constexpr double kPathActionRelTol = 1e-6;
constexpr double kPathBendTol = 1e-8;
constexpr double kConjugationTol = 1e-5;
constexpr double kExponentTarget = 2.5;
constexpr double kExponentTol = 0.1;
constexpr double kPeriodicityTol = 1e-12;
constexpr double kSuspensionSeconds = 300.0;
constexpr double kBetaTol = 1e-8;
constexpr double kCubicRatioTol = 0.02;
constexpr double kAlphaRelTol = 0.01;
constexpr double kMatherSeconds = 120.0;
constexpr double kGapPersistTol = 1e-6;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body)
{
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass)
        ++failures;
    std::printf("[%s] %2d %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

RadiusProfile circle() { return RadiusProfile{{1.0}, {}}; }
RadiusProfile oval() { return RadiusProfile{{1.0, 0.0, 0.3}, {}}; }
RadiusProfile strong_oval() { return RadiusProfile{{1.0, 0.0, 0.45, 0.2}, {}}; }

Outcome circle_exactness()
{
    const auto t0 = std::chrono::steady_clock::now();
    const BoundaryCurve c = build_curve(circle());
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> us(0.0, 1.0), uv(1e-3, kPi - 1e-3);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const BilliardState st{us(rng), uv(rng)};
        const BilliardState nx = reflect(c, st);
        double ds = nx.s - (st.s + st.v / kPi);
        ds -= std::round(ds);
        worst = std::max({worst, std::abs(ds), std::abs(nx.v - st.v)});
    }
    const double secs = seconds_since(t0);
    return {worst < kReflectTol && secs < kReflectSeconds, fmt("max err %.2e", worst) + fmt(" over 1000 states in %.3f s", secs)};
}

Outcome generating_partials()
{
    double worst = 0.0;
    for (const RadiusProfile& p : {circle(), oval()}) {
        const BoundaryCurve c = build_curve(p);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> us(0.0, 1.0), ug(0.02, 0.95);
        auto h = [&](double a, double b) { return generating_h(c, a, b).h; };
        for (int i = 0; i < 100; ++i) {
            const double s = us(rng), s1 = s + ug(rng), e = 1e-5;
            const ChordData d = generating_h(c, s, s1);
            // cos v and -cos v+ from the chord angles, against differences of the chord length
            const double fd1 = (h(s + e, s1) - h(s - e, s1)) / (2 * e);
            const double fd2 = (h(s, s1 + e) - h(s, s1 - e)) / (2 * e);
            const double r1 = std::abs(fd1 - std::cos(d.v)) / std::max(1e-2, std::abs(std::cos(d.v)));
            const double r2 = std::abs(fd2 + std::cos(d.v_next)) / std::max(1e-2, std::abs(std::cos(d.v_next)));
            worst = std::max({worst, r1, r2});
        }
    }
    return {worst < kPartialRelTol, fmt("max rel err %.2e on 2 x 100 chords", worst)};
}

Outcome expansion_orders()
{
    const auto t0 = std::chrono::steady_clock::now();
    const BoundaryCurve curve = build_curve(oval());
    const LazutkinChart chart(curve);
    std::vector<double> vs, gaps;
    for (int k = 6; k <= 16; ++k)
        vs.push_back(std::ldexp(1.0, -k));
    for (int k = 3; k <= 10; ++k)
        gaps.push_back(std::ldexp(1.0, -k));
    double lo = 1e9;
    for (double s : {0.1, 0.37, 0.66}) {
        const ExpansionReport r = verify_expansion_order(curve, s, vs);
        lo = std::min({lo, r.s_fit.slope, r.v_fit.slope});
    }
    const double hs = tilde_h_remainder_order(chart, 0.1, gaps).slope;
    const double secs = seconds_since(t0);
    return {lo >= kMinSlope && hs >= kMinSlope && secs < kExpansionSeconds,
            fmt("min map slope %.3f", lo) + fmt(", h~ slope %.3f", hs)};
}

Outcome integrable_suspension()
{
    const CubicGeneratingFn cubic;
    const InterpolatingLagrangian lag(cubic);
    double lerr = 0.0, herr = 0.0;
    for (double t : {0.0, 0.25, 0.5, 1.0})
        for (double v : {1e-3, 1e-2, 0.1, 0.5}) {
            const double L = lag.value(0.3, v, t);
            lerr = std::max(lerr, std::abs(L - v * v * v / 6.0) / (v * v * v));
        }
    for (double t : {0.0, 0.5, 1.0})
        for (double l : {1e-6, 1e-4, 1e-2}) {
            const double H = legendre_hamiltonian(lag, 0.3, l, t).H;
            const double ref = 2.0 * std::sqrt(2.0) / 3.0 * std::pow(l, 1.5);
            herr = std::max(herr, std::abs(H - ref) / ref);
        }
    return {lerr < kCubicTol && herr < kCubicTol, fmt("L rel err %.2e", lerr) + fmt(", H rel err %.2e", herr)};
}

Outcome variational_identity()
{
    const LazutkinChart chart(build_curve(oval()));
    const LazutkinGeneratingFn h(chart);
    const InterpolatingLagrangian lag(h);
    double act = 0.0, bend = 0.0;
    for (auto [x, X] : {std::pair{0.2, 0.28}, {0.55, 0.6}}) {
        const PathMinimum m = minimize_path_action(lag, x, X, 50);
        const double ref = h.eval(x, X).value;
        act = std::max(act, std::abs(m.action - ref) / ref);
        bend = std::max(bend, m.max_bend);
    }
    return {act < kPathActionRelTol && bend < kPathBendTol, fmt("action rel err %.2e", act) + fmt(", max bend %.2e", bend)};
}

struct MainRuns {
    MainTheoremReport circle, oval;
    double seconds = 0.0;
};

Outcome main_theorem(MainRuns& runs, int jobs)
{
    const auto t0 = std::chrono::steady_clock::now();
    SuspensionConfig cfg;
    cfg.jobs = jobs;
    MainTheoremOptions opts;
    opts.conjugation_tol = kConjugationTol;
    opts.exponent_target = kExponentTarget;
    opts.exponent_tol = kExponentTol;
    const LazutkinChart c(build_curve(circle())), o(build_curve(oval()));
    runs.circle = verify_main_theorem(c, cfg, opts);
    runs.oval = verify_main_theorem(o, cfg, opts);
    runs.seconds = seconds_since(t0);
    bool ok = runs.seconds < kSuspensionSeconds;
    std::string detail;
    for (const auto* r : {&runs.circle, &runs.oval}) {
        ok = ok && r->conjugation.sup_error < kConjugationTol &&
             std::abs(r->remainder.fit.slope - kExponentTarget) <= kExponentTol && r->periodicity < kPeriodicityTol;
        detail += (r == &runs.circle ? "circle" : "; oval") + fmt(" sup err %.2e", r->conjugation.sup_error) +
                  fmt(" exponent %.4f", r->remainder.fit.slope) + fmt(" periodicity %.1e", r->periodicity);
    }
    return {ok, detail};
}

Outcome positivity(const MainRuns& runs)
{
    const double m = std::min(runs.circle.positivity.min_ratio, runs.oval.positivity.min_ratio);
    return {m > 1.0, fmt("min 2 sqrt(l) R = %.4f (bound 1)", m) + fmt(", oval %.4f", runs.oval.positivity.min_ratio)};
}

double circle_beta(double w) { return (w - std::sin(kPi * w) / kPi) / (kPi * kPi); }

double circle_alpha(double c)
{
    const double r = 0.5 / kPi;
    const double a = std::asin(std::sqrt(c / (8 * r * r)));
    return 4 * r * c * a - 16 * r * r * r * a + 2 * r * std::sqrt(8 * r * r * c - c * c);
}

Outcome mather_benchmarks()
{
    const auto t0 = std::chrono::steady_clock::now();
    const LazutkinChart chart(build_curve(circle()));
    const LazutkinGeneratingFn h(chart);
    double berr = 0.0;
    for (double w : {1.0 / 3, 1.0 / 5, 1.0 / 8})
        berr = std::max(berr, std::abs(beta_at(h, w).beta - circle_beta(w)));
    const double ratio = beta_at(h, 0.01).beta / 1e-6;
    std::vector<double> grid;
    for (int n = 2; n <= 1000; n = std::max(n + 1, static_cast<int>(n * 1.15)))
        grid.push_back(1.0 / n);
    const BetaTable beta = beta_table(h, grid);
    const double scale = 8.0 / (4 * kPi * kPi);
    double arel = 0.0;
    for (int k = 0; k <= 40; ++k) {
        const double c = scale * std::pow(10.0, -4.0 + 2.0 * k / 40);
        arel = std::max(arel, std::abs(alpha_from_beta(beta, c) / circle_alpha(c) - 1.0));
    }
    const double secs = seconds_since(t0);
    const bool ok = berr < kBetaTol && std::abs(6 * ratio - 1.0) < kCubicRatioTol && arel < kAlphaRelTol && beta.convex &&
                    secs < kMatherSeconds;
    return {ok, fmt("beta err %.2e", berr) + fmt(", 6 beta(0.01)/0.01^3 = %.5f", 6 * ratio) +
                    fmt(", alpha rel err %.2e", arel) + (beta.convex ? ", convex" : ", NOT convex") +
                    fmt(" on %.0f samples", static_cast<double>(beta.omega.size()))};
}

Outcome gap_detection()
{
    const LazutkinChart strong(build_curve(strong_oval())), round(build_curve(circle()));
    const LazutkinGeneratingFn hs(strong), hc(round);
    const MatherSetApprox half = gap_measure(hs, 0.5, 100);
    const Configuration c2 = minimal_configuration(hs, 1, 2);
    const double spacing = c2.x[1] - c2.x[0];
    const double golden = (std::sqrt(5.0) - 1) / 2;
    const double omega = 1.0 / (2.0 + 1.0 / (10.0 + 1.0 / (1.0 + golden)));
    std::vector<double> gaps;
    bool graph = half.graph_ok;
    for (int cap : {25, 100, 300}) {
        const MatherSetApprox m = gap_measure(hs, omega, cap);
        gaps.push_back(m.gap);
        graph = graph && m.graph_ok;
    }
    const MatherSetApprox ref = gap_measure(hc, omega, 300);
    const bool persists = gaps.back() > 0.1 && std::abs(gaps.back() - gaps.front()) < kGapPersistTol;
    const bool ok = !half.degenerate && std::abs(spacing - 0.5) > 1e-3 && persists && graph && ref.degenerate;
    return {ok, fmt("1/2 spacing %.4f", spacing) + fmt("; gap at q<=25 %.6f", gaps.front()) +
                    fmt(", q<=300 %.6f", gaps.back()) + fmt("; circle gap %.5f", ref.gap) +
                    (ref.degenerate ? " (degenerate)" : " (NOT degenerate)")};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism()
{
    constexpr int jobs = 4;  // threaded run against the serial one
    const fs::path root = fs::temp_directory_path() / "billiards_acceptance_determinism";
    fs::remove_all(root);
    json j = {{"version", 1},
              {"profile", {{"cos", {1.0, 0.0, 0.3}}, {"sin", {0.0, 0.0, 0.0, 0.1}}}},
              {"seed", 17},
              {"restarts", 3},
              {"omega_count", 16},
              {"gap_omegas", {0.5}},
              {"phase_orbits", 4},
              {"phase_steps", 100},
              {"sample_points", 40}};
    const app::RunConfig cfg = app::parse_config(j);
    std::vector<fs::path> dirs;
    for (int run = 0; run < 2; ++run) {
        app::RunConfig c = cfg;
        c.jobs = run == 0 ? 1 : jobs;
        const fs::path out = root / ("run" + std::to_string(run));
        fs::create_directories(out);
        app::cmd_boundary_info(c, out);
        app::cmd_phase(c, out);
        app::cmd_verify(c, "expansion", out);
        app::cmd_mather(c, out);
        app::cmd_suspend(c, out);
        dirs.push_back(out);
    }
    int files = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
        ++files;
        if (slurp(e.path()) != slurp(dirs[1] / e.path().filename()))
            ++differ;
    }
    const bool same_set = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{}) == files;
    fs::remove_all(root);
    return {files > 0 && differ == 0 && same_set,
            fmt("%.0f files compared", files) + fmt(", %.0f differ", differ) + fmt(" (jobs 1 vs %.0f)", jobs)};
}

}  // namespace

int main()
{
    const int jobs = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 4u));
    MainRuns runs;
    report(1, "circle exactness", circle_exactness);
    report(2, "generating partials", generating_partials);
    report(3, "expansion orders", expansion_orders);
    report(4, "integrable suspension", integrable_suspension);
    report(5, "variational identity", variational_identity);
    report(6, "suspension conjugates map", [&] { return main_theorem(runs, jobs); });
    report(7, "positivity margin", [&] { return positivity(runs); });
    report(8, "Mather benchmarks", mather_benchmarks);
    report(9, "gap detection", gap_detection);
    report(10, "determinism", determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
