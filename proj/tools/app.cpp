#include "app.hpp"

#include "billiards/billiard.hpp"
#include "billiards/error.hpp"
#include "billiards/lazutkin.hpp"
#include "billiards/mather.hpp"
#include "billiards/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace billiards::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

// Runs f(i) for i < n on up to `jobs` threads; results keep index order.
template <class F>
auto parallel_map(std::size_t n, int jobs, F f) -> std::vector<decltype(f(std::size_t{}))>
{
    std::vector<decltype(f(std::size_t{}))> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < threads; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

double number(const json& j, const std::string& key)
{
    if (!j.is_number())
        config_error("'" + key + "' must be a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& key)
{
    if (!j.is_number_integer())
        config_error("'" + key + "' must be an integer");
    return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& key)
{
    if (!j.is_array())
        config_error("'" + key + "' must be an array of numbers");
    std::vector<double> v;
    for (const auto& e : j)
        v.push_back(number(e, key));
    return v;
}

std::vector<double> reciprocal_grid(double lo, double hi, int count)
{
    std::set<int> ns;
    const double a = std::log(1.0 / hi), b = std::log(1.0 / lo);
    for (int k = 0; k < count; ++k) {
        const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        ns.insert(std::max(2, static_cast<int>(std::lround(std::exp(a + f * (b - a))))));
    }
    std::vector<double> w;
    for (int n : ns)
        w.push_back(1.0 / n);
    std::sort(w.begin(), w.end());
    return w;
}

std::vector<double> geometric(double lo, double hi, int count)
{
    std::vector<double> v;
    for (int k = 0; k < count; ++k)
        v.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
    return v;
}

json profile_json(const RadiusProfile& p) { return {{"cos", p.cos}, {"sin", p.sin}}; }

json suspension_json(const SuspensionConfig& c)
{
    return {{"kappa", c.kappa},       {"epsilon", c.epsilon}, {"mollifier_width", c.mollifier_width},
            {"t1", c.t1},             {"t2", c.t2},           {"ode_tol", c.ode_tol},
            {"table_nx", c.table_nx}, {"table_nu", c.table_nu}, {"table_nt", c.table_nt},
            {"w_nx", c.w_nx},         {"w_nu", c.w_nu},       {"w_nt", c.w_nt}};
}

void dump_into(std::ostringstream& os, const json& j, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                os << ",\n";
            first = false;
            os << pad << json(it.key()).dump() << ": ";
            dump_into(os, it.value(), indent, depth + 1);
        }
        os << "\n" << close << "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << "[";
        bool first = true;
        for (const auto& e : j) {
            if (!first)
                os << ", ";
            first = false;
            dump_into(os, e, indent, depth + 1);
        }
        os << "]";
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        if (std::isfinite(v))
            os << format_number(v);
        else
            os << "null";
        return;
    }
    default:
        os << j.dump();
    }
}

LazutkinChart make_chart(const RunConfig& cfg) { return LazutkinChart(build_curve(cfg.profile)); }

SuspensionConfig suspension_of(const RunConfig& cfg)
{
    SuspensionConfig c = cfg.suspension;
    c.jobs = cfg.jobs;
    return c;
}

SampleOptions sample_of(const RunConfig& cfg)
{
    SampleOptions s;
    s.points = cfg.verify.sample_points;
    s.l_min = cfg.verify.sample_l_min;
    s.l_max = cfg.verify.sample_l_max;
    s.seed = cfg.seed;
    return s;
}

void write_conjugation_csv(const fs::path& path, const ConjugationReport& r)
{
    CsvWriter csv(path, {"x", "l", "flow_x", "flow_l", "map_x", "map_l", "dx", "dl"});
    for (const auto& p : r.points)
        csv.row({p.start.x, p.start.l, p.flow.x, p.flow.l, p.map.x, p.map.l, p.dx, p.dl});
}

json positivity_json(const PositivityReport& p)
{
    return {{"min_ratio", p.min_ratio}, {"x", p.x}, {"l", p.l}, {"t", p.t}, {"second_half", p.second_half}};
}

json fit_json(const PowerFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"used", f.used}}; }

int suspension_report(const RunConfig& cfg, const fs::path& out, bool judge)
{
    const LazutkinChart chart = make_chart(cfg);
    const SuspensionPipeline pipe(chart, suspension_of(cfg));
    const SmoothedHamiltonian& H = pipe.smoothed();
    const ConjugationReport conj = conjugation_check(H, chart, sample_of(cfg));
    const RemainderReport rem = remainder_fit(H);
    const PositivityReport pos = positivity_scan(H);
    const bool passed = conj.sup_error < cfg.verify.conjugation_tol && std::abs(rem.fit.slope - 2.5) <= 0.1 &&
                        pos.min_ratio > 1.0;
    json rep = {{"conjugation_error", conj.sup_error},
                {"remainder_exponent", rem.fit.slope},
                {"positivity_margin", pos.min_ratio},
                {"config", cfg.echo},
                {"conjugation", {{"sup_dx", conj.sup_dx}, {"sup_dl", conj.sup_dl}, {"sup_dl_rel", conj.sup_dl_rel}}},
                {"remainder_fit", fit_json(rem.fit)},
                {"remainder_max_scaled", rem.max_scaled},
                {"positivity", positivity_json(pos)}};
    if (judge)
        rep["passed"] = passed;
    write_json(out / "suspension_report.json", rep);
    write_conjugation_csv(out / "verification.csv", conj);
    return !judge || passed ? kOk : kNumericFailure;
}

int verify_expansion(const RunConfig& cfg, const fs::path& out)
{
    const BoundaryCurve curve = build_curve(cfg.profile);
    const LazutkinChart chart(curve);
    std::vector<double> vs, gaps;
    for (int k = 6; k <= 16; ++k)
        vs.push_back(std::ldexp(1.0, -k));
    for (int k = 3; k <= 10; ++k)
        gaps.push_back(std::ldexp(1.0, -k));
    const double s = cfg.verify.expansion_s;
    const ExpansionReport rep = verify_expansion_order(curve, s, vs);
    const PowerFit hfit = tilde_h_remainder_order(chart, chart.x_of_s(s), gaps);
    constexpr double kMinSlope = 3.9;
    const bool s_ok = rep.s_exact || rep.s_fit.slope >= kMinSlope;
    const bool v_ok = rep.v_exact || rep.v_fit.slope >= kMinSlope;
    const bool h_ok = hfit.slope >= kMinSlope;
    const json j = {{"stage", "expansion"},
                    {"s", s},
                    {"min_slope", kMinSlope},
                    {"s_slope", rep.s_fit.slope},
                    {"s_exact", rep.s_exact},
                    {"v_slope", rep.v_fit.slope},
                    {"v_exact", rep.v_exact},
                    {"h_tilde_slope", hfit.slope},
                    {"passed", s_ok && v_ok && h_ok},
                    {"config", cfg.echo}};
    write_json(out / "verify_expansion.json", j);
    CsvWriter csv(out / "expansion.csv", {"v", "s_residual", "v_residual"});
    for (std::size_t i = 0; i < vs.size(); ++i)
        csv.row({vs[i], rep.s_residuals.at(i), rep.v_residuals.at(i)});
    return s_ok && v_ok && h_ok ? kOk : kNumericFailure;
}

int verify_positivity(const RunConfig& cfg, const fs::path& out)
{
    const LazutkinChart chart = make_chart(cfg);
    const SuspensionPipeline pipe(chart, suspension_of(cfg));
    const PositivityReport pos = positivity_scan(pipe.smoothed());
    // per-level minima: the bound is R > 1/(2 sqrt l), i.e. margin > 1
    CsvWriter csv(out / "positivity.csv", {"l_min", "min_ratio"});
    for (double l : geometric(1e-7, cfg.suspension.epsilon, 9))
        csv.row({l, positivity_scan(pipe.smoothed(), 16, 6, 16, l).min_ratio});
    const json j = {{"stage", "positivity"}, {"bound", 1.0},       {"positivity", positivity_json(pos)},
                    {"passed", pos.min_ratio > 1.0}, {"config", cfg.echo}};
    write_json(out / "verify_positivity.json", j);
    return pos.min_ratio > 1.0 ? kOk : kNumericFailure;
}

int verify_main(const RunConfig& cfg, const fs::path& out)
{
    const LazutkinChart chart = make_chart(cfg);
    const SuspensionPipeline pipe(chart, suspension_of(cfg));
    MainTheoremOptions opts;
    opts.sample = sample_of(cfg);
    opts.conjugation_tol = cfg.verify.conjugation_tol;
    const MainTheoremReport r = verify_main_theorem(pipe, opts);
    const json j = {
        {"stage", "main-theorem"},
        {"conjugation_error", r.conjugation.sup_error},
        {"conjugation_dl_rel", r.conjugation.sup_dl_rel},
        {"remainder_exponent", r.remainder.fit.slope},
        {"remainder_fit", fit_json(r.remainder.fit)},
        {"remainder_max_scaled", r.remainder.max_scaled},
        {"periodicity_error", r.periodicity},
        {"c1_jump", r.c1_jump},
        {"positivity_margin", r.positivity.min_ratio},
        {"positivity", positivity_json(r.positivity)},
        {"reconstruction", {{"residual", r.reconstruction.residual}, {"jacobian_residual", r.reconstruction.jacobian_residual}}},
        {"boundary_image", {r.boundary.x, r.boundary.l}},
        {"checks", {{"conjugation", r.conjugation_ok}, {"remainder", r.remainder_ok}, {"periodic", r.periodic_ok},
                    {"positivity", r.positivity_ok}, {"boundary", r.boundary_ok}}},
        {"passed", r.passed()},
        {"config", cfg.echo}};
    write_json(out / "verify_main_theorem.json", j);
    write_conjugation_csv(out / "verification.csv", r.conjugation);
    CsvWriter csv(out / "remainder.csv", {"l", "sup_remainder"});
    for (std::size_t i = 0; i < r.remainder.l.size(); ++i)
        csv.row({r.remainder.l[i], r.remainder.sup[i]});
    return r.passed() ? kOk : kNumericFailure;
}

double circle_beta(double w) { return (w - std::sin(std::numbers::pi * w) / std::numbers::pi) / (std::numbers::pi * std::numbers::pi); }

double circle_alpha(double c)
{
    const double r = 0.5 / std::numbers::pi;
    const double a = std::asin(std::sqrt(c / (8 * r * r)));
    return 4 * r * c * a - 16 * r * r * r * a + 2 * r * std::sqrt(8 * r * r * c - c * c);
}

}  // namespace

RadiusProfile parse_profile(const json& j)
{
    if (!j.is_object())
        config_error("profile must be an object with 'cos' and 'sin' arrays");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "cos" && it.key() != "sin")
            config_error("unknown profile key '" + it.key() + "'");
    if (!j.contains("cos"))
        config_error("profile needs 'cos'");
    RadiusProfile p;
    p.cos = numbers(j.at("cos"), "cos");
    if (j.contains("sin"))
        p.sin = numbers(j.at("sin"), "sin");
    try {
        p.validate();
    } catch (const Error& e) {
        config_error(std::string("invalid profile: ") + e.what());
    }
    return p;
}

RunConfig parse_config(const json& j, const fs::path& base_dir)
{
    if (!j.is_object())
        config_error("config must be a JSON object");
    static const std::set<std::string> known{
        "version",      "profile",      "profile_file", "kappa",         "epsilon",      "mollifier_width",
        "t1",           "t2",           "ode_tol",      "table_nx",      "table_nu",     "table_nt",
        "w_nx",         "w_nu",         "w_nt",         "seed",          "jobs",         "phase_coords",
        "phase_orbits", "phase_steps",  "phase_x0",     "phase_l_min",   "phase_l_max",  "phase_v_min",
        "phase_v_max",  "expansion_s",  "sample_points", "sample_l_min", "sample_l_max", "conjugation_tol",
        "omegas",       "omega_min",    "omega_max",    "omega_count",   "alpha_count",  "q_cap",
        "restarts",     "gap_omegas",   "gap_q_caps"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            config_error("unknown config key '" + it.key() + "'");
    if (!j.contains("version"))
        config_error("config needs a 'version' field");
    if (integer(j.at("version"), "version") != kConfigVersion)
        config_error("unsupported config version");

    RunConfig c;
    if (j.contains("profile") == j.contains("profile_file"))
        config_error("give exactly one of 'profile' and 'profile_file'");
    if (j.contains("profile")) {
        c.profile = parse_profile(j.at("profile"));
    } else {
        if (!j.at("profile_file").is_string())
            config_error("'profile_file' must be a string");
        const fs::path path = base_dir / j.at("profile_file").get<std::string>();
        std::ifstream in(path);
        if (!in)
            config_error("cannot open profile file " + path.string());
        json pj;
        try {
            pj = json::parse(in);
        } catch (const json::exception& e) {
            config_error("profile file " + path.string() + ": " + e.what());
        }
        c.profile = parse_profile(pj);
    }

    auto num = [&](const char* key, double& dst) {
        if (j.contains(key))
            dst = number(j.at(key), key);
    };
    auto intg = [&](const char* key, int& dst) {
        if (j.contains(key))
            dst = integer(j.at(key), key);
    };

    double kappa = c.suspension.kappa, width = c.suspension.mollifier_width;
    num("kappa", kappa);
    num("mollifier_width", width);
    c.suspension = SuspensionConfig::with_defaults(kappa, width);
    num("t1", c.suspension.t1);
    num("t2", c.suspension.t2);
    num("epsilon", c.suspension.epsilon);
    num("ode_tol", c.suspension.ode_tol);
    intg("table_nx", c.suspension.table_nx);
    intg("table_nu", c.suspension.table_nu);
    intg("table_nt", c.suspension.table_nt);
    intg("w_nx", c.suspension.w_nx);
    intg("w_nu", c.suspension.w_nu);
    intg("w_nt", c.suspension.w_nt);
    intg("jobs", c.jobs);
    if (j.contains("seed")) {
        const json& sj = j.at("seed");
        if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0))
            config_error("'seed' must be a nonnegative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.suspension.jobs = c.jobs;
    c.suspension.validate();

    if (j.contains("phase_coords")) {
        if (!j.at("phase_coords").is_string())
            config_error("'phase_coords' must be a string");
        c.phase.coords = j.at("phase_coords").get<std::string>();
    }
    intg("phase_orbits", c.phase.orbits);
    intg("phase_steps", c.phase.steps);
    num("phase_x0", c.phase.x0);
    num("phase_l_min", c.phase.l_min);
    num("phase_l_max", c.phase.l_max);
    num("phase_v_min", c.phase.v_min);
    num("phase_v_max", c.phase.v_max);
    if (c.phase.coords != "lazutkin" && c.phase.coords != "billiard")
        config_error("'phase_coords' must be \"lazutkin\" or \"billiard\"");
    if (c.phase.orbits < 1 || c.phase.steps < 1)
        config_error("phase sweep needs at least one orbit and one step");
    if (!(c.phase.l_min > 0.0 && c.phase.l_min <= c.phase.l_max))
        config_error("phase action range must satisfy 0 < l_min <= l_max");
    if (!(c.phase.v_min > 0.0 && c.phase.v_min <= c.phase.v_max && c.phase.v_max < std::numbers::pi))
        config_error("phase angle range must satisfy 0 < v_min <= v_max < pi");

    num("expansion_s", c.verify.expansion_s);
    intg("sample_points", c.verify.sample_points);
    num("sample_l_min", c.verify.sample_l_min);
    num("sample_l_max", c.verify.sample_l_max);
    num("conjugation_tol", c.verify.conjugation_tol);
    if (c.verify.sample_points < 1 || !(c.verify.sample_l_min > 0.0 && c.verify.sample_l_min <= c.verify.sample_l_max))
        config_error("sample range must be nonempty with 0 < l_min <= l_max");
    if (c.verify.sample_l_max > c.suspension.epsilon)
        config_error("sample_l_max must not exceed epsilon");

    if (j.contains("omegas")) {
        c.mather.omegas = numbers(j.at("omegas"), "omegas");
        if (c.mather.omegas.empty())
            config_error("omega grid is empty");
    }
    num("omega_min", c.mather.omega_min);
    num("omega_max", c.mather.omega_max);
    intg("omega_count", c.mather.omega_count);
    intg("alpha_count", c.mather.alpha_count);
    intg("q_cap", c.mather.q_cap);
    intg("restarts", c.mather.restarts);
    if (j.contains("gap_omegas"))
        c.mather.gap_omegas = numbers(j.at("gap_omegas"), "gap_omegas");
    if (j.contains("gap_q_caps")) {
        const json& g = j.at("gap_q_caps");
        if (!g.is_array() || g.empty())
            config_error("'gap_q_caps' must be a nonempty array of integers");
        c.mather.gap_q_caps.clear();
        for (const auto& e : g)
            c.mather.gap_q_caps.push_back(integer(e, "gap_q_caps"));
    }
    if (c.mather.omegas.empty() && c.mather.omega_count < 1)
        config_error("omega grid is empty");
    if (!(c.mather.omega_min > 0.0 && c.mather.omega_min <= c.mather.omega_max && c.mather.omega_max <= 0.5))
        config_error("omega range must satisfy 0 < omega_min <= omega_max <= 1/2");
    for (double w : c.mather.omegas)
        if (!(w > 0.0 && w < 1.0))
            config_error("omegas must lie in (0, 1)");
    for (double w : c.mather.gap_omegas)
        if (!(w > 0.0 && w < 1.0))
            config_error("gap_omegas must lie in (0, 1)");
    if (c.mather.alpha_count < 2 || c.mather.q_cap < 2 || c.mather.restarts < 1)
        config_error("alpha_count >= 2, q_cap >= 2 and restarts >= 1 required");
    for (int q : c.mather.gap_q_caps)
        if (q < 2)
            config_error("gap_q_caps entries must be >= 2");

    c.echo = j;
    c.echo["profile"] = profile_json(c.profile);
    c.echo.erase("profile_file");
    c.echo["suspension"] = suspension_json(c.suspension);
    return c;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        config_error("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        config_error("config " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

bool is_circle(const RadiusProfile& p)
{
    for (std::size_t k = 1; k < p.cos.size(); ++k)
        if (p.cos[k] != 0.0)
            return false;
    return std::all_of(p.sin.begin(), p.sin.end(), [](double v) { return v == 0.0; });
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string dump_json(const json& j, int indent)
{
    std::ostringstream os;
    dump_into(os, j, indent, 0);
    os << "\n";
    return os.str();
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
    out << dump_json(j);
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary)
{
    if (!out_)
        throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values)
{
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << (i ? "," : "") << format_number(values[i]);
    out_ << "\n";
}

void CsvWriter::blank() { out_ << "\n"; }

int cmd_boundary_info(const RunConfig& cfg, const fs::path& out)
{
    const LazutkinChart chart = make_chart(cfg);
    const BoundaryCurve& c = chart.curve();
    const json j = {{"c1", chart.c1()},
                    {"scale", c.scale()},
                    {"min_radius", c.min_radius()},
                    {"max_frequency", cfg.profile.max_frequency()},
                    {"table_checksum", chart.table_checksum()},
                    {"circle", is_circle(cfg.profile)},
                    {"profile", profile_json(cfg.profile)}};
    write_json(out / "chart_summary.json", j);
    return kOk;
}

int cmd_phase(const RunConfig& cfg, const fs::path& out)
{
    const PhaseSweep& ph = cfg.phase;
    if (ph.coords == "billiard") {
        const BoundaryCurve curve = build_curve(cfg.profile);
        const std::vector<double> vs =
            ph.orbits == 1 ? std::vector<double>{ph.v_min} : [&] {
                std::vector<double> v;
                for (int k = 0; k < ph.orbits; ++k)
                    v.push_back(ph.v_min + (ph.v_max - ph.v_min) * k / (ph.orbits - 1));
                return v;
            }();
        const auto orbits = parallel_map(vs.size(), cfg.jobs, [&](std::size_t i) {
            return orbit(curve, BilliardState{ph.x0, vs[i]}, ph.steps);
        });
        CsvWriter csv(out / "phase.csv", {"step", "s", "v"});
        for (std::size_t i = 0; i < orbits.size(); ++i) {
            if (i)
                csv.blank();
            for (std::size_t n = 0; n < orbits[i].size(); ++n)
                csv.row({static_cast<double>(n), orbits[i][n].s, orbits[i][n].v});
        }
        return kOk;
    }
    const LazutkinChart chart = make_chart(cfg);
    const std::vector<double> ls = geometric(ph.l_min, ph.l_max, ph.orbits);
    const auto orbits = parallel_map(ls.size(), cfg.jobs, [&](std::size_t i) {
        std::vector<LazutkinState> o{{ph.x0 - std::floor(ph.x0), ls[i]}};
        for (int n = 0; n < ph.steps; ++n) {
            LazutkinState s = lazutkin_map(chart, o.back());
            s.x -= std::floor(s.x);
            o.push_back(s);
        }
        return o;
    });
    CsvWriter csv(out / "phase.csv", {"x", "l"});
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        if (i)
            csv.blank();
        for (const auto& s : orbits[i])
            csv.row({s.x, s.l});
    }
    return kOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& stage, const fs::path& out)
{
    if (stage == "expansion")
        return verify_expansion(cfg, out);
    if (stage == "suspension")
        return suspension_report(cfg, out, true);
    if (stage == "positivity")
        return verify_positivity(cfg, out);
    if (stage == "main-theorem")
        return verify_main(cfg, out);
    config_error("unknown stage '" + stage + "'");
}

int cmd_suspend(const RunConfig& cfg, const fs::path& out) { return suspension_report(cfg, out, false); }

int cmd_mather(const RunConfig& cfg, const fs::path& out)
{
    const MatherGrid& ms = cfg.mather;
    const LazutkinChart chart = make_chart(cfg);
    const LazutkinGeneratingFn h(chart);
    BetaOptions bo;
    bo.q_cap = ms.q_cap;
    bo.minimize.seed = cfg.seed;
    bo.minimize.restarts = ms.restarts;

    std::vector<double> grid = ms.omegas.empty() ? reciprocal_grid(ms.omega_min, ms.omega_max, ms.omega_count) : ms.omegas;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto values = parallel_map(grid.size(), cfg.jobs, [&](std::size_t i) { return beta_at(h, grid[i], bo); });

    BetaTable beta;
    beta.omega.push_back(0.0);
    beta.beta.push_back(0.0);
    beta.err.push_back(0.0);
    for (const BetaValue& v : values) {
        beta.omega.push_back(v.omega);
        beta.beta.push_back(v.beta);
        beta.err.push_back(v.err);
    }
    beta.convex = is_convex(beta.omega, beta.beta);
    {
        CsvWriter csv(out / "beta.csv", {"omega", "beta", "err"});
        for (std::size_t i = 0; i < beta.omega.size(); ++i)
            csv.row({beta.omega[i], beta.beta[i], beta.err[i]});
    }

    const std::size_t n = beta.omega.size();
    const double c_lo = beta.beta[1] / beta.omega[1];
    const double c_hi = (beta.beta[n - 1] - beta.beta[n - 2]) / (beta.omega[n - 1] - beta.omega[n - 2]);
    std::vector<double> cs{0.0};
    for (double c : geometric(c_lo, c_hi, ms.alpha_count - 1))
        cs.push_back(c);
    const AlphaTable alpha = alpha_table(beta, cs);
    {
        CsvWriter csv(out / "alpha.csv", {"c", "alpha"});
        for (std::size_t i = 0; i < alpha.c.size(); ++i)
            csv.row({alpha.c[i], alpha.alpha[i]});
    }
    const double fenchel = fenchel_violation(beta, alpha);

    json report = {{"omega_count", grid.size()},
                   {"beta_convex", beta.convex},
                   {"alpha_convex", alpha.convex},
                   {"fenchel_violation", fenchel},
                   {"config", cfg.echo}};
    bool ok = beta.convex && alpha.convex && fenchel <= 1e-9;

    const auto small = std::count_if(grid.begin(), grid.end(), [](double w) { return w <= 0.05; });
    if (small >= 4) {
        const DegeneracyReport d = beta_degeneracy_check(beta);
        report["degeneracy"] = {{"slope", d.fit.slope}, {"cubic", d.cubic}, {"points", d.fit.used}};
        ok = ok && d.cubic;
    }

    if (is_circle(cfg.profile)) {
        double beta_err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            beta_err = std::max(beta_err, std::abs(beta.beta[i] - circle_beta(beta.omega[i])));
        const double ratio = beta_at(h, 0.01, bo).beta / 1e-6;
        const double r = 0.5 / std::numbers::pi, scale = 8 * r * r;
        double alpha_rel = 0.0;
        int alpha_points = 0;
        for (double c : geometric(1e-4 * scale, 1e-2 * scale, 21)) {
            if (c > c_hi)
                continue;
            alpha_rel = std::max(alpha_rel, std::abs(alpha_from_beta(beta, c) / circle_alpha(c) - 1.0));
            ++alpha_points;
        }
        const bool circle_ok = beta_err < 1e-8 && std::abs(ratio * 6.0 - 1.0) < 0.02 && (alpha_points == 0 || alpha_rel < 0.01);
        report["circle"] = {{"beta_max_error", beta_err},       {"beta_ratio_at_0.01", ratio},
                            {"alpha_max_rel_error", alpha_rel}, {"alpha_points", alpha_points},
                            {"passed", circle_ok}};
        ok = ok && circle_ok;
    }

    json gaps = json::array();
    for (std::size_t g = 0; g < ms.gap_omegas.size(); ++g) {
        const double w = ms.gap_omegas[g];
        json rows = json::array();
        MatherSetApprox last;
        for (int cap : ms.gap_q_caps) {
            MinimizeOptions mo = bo.minimize;
            last = gap_measure(h, w, cap, mo);
            rows.push_back({{"q_cap", cap}, {"p", last.p}, {"q", last.q}, {"gap", last.gap}, {"min_gap", last.min_gap},
                            {"degenerate", last.degenerate}, {"graph_ok", last.graph_ok}});
            ok = ok && last.graph_ok;
        }
        gaps.push_back({{"omega", w}, {"refinements", rows}});
        CsvWriter csv(out / ("mather_set_" + std::to_string(g) + ".csv"), {"x", "momentum", "gap_flag"});
        // gap_flag marks the left end of the largest complementary interval
        std::size_t widest = 0;
        for (std::size_t i = 0; i < last.points.size(); ++i) {
            const double next = i + 1 < last.points.size() ? last.points[i + 1] : last.points[0] + 1.0;
            if (next - last.points[i] >= last.gap)
                widest = i;
        }
        for (std::size_t i = 0; i < last.points.size(); ++i)
            csv.row({last.points[i], last.momenta[i], i == widest && !last.degenerate ? 1.0 : 0.0});
    }
    report["gaps"] = gaps;
    report["passed"] = ok;
    write_json(out / "mather_report.json", report);
    return ok ? kOk : kNumericFailure;
}

int run(int argc, char** argv)
{
    CLI::App app{"Convex billiard laboratory: billiard map, Lazutkin chart, Hamiltonian suspension and "
                 "Aubry-Mather tables.\n"
                 "Outputs (17 significant digits, header row first):\n"
                 "  boundary-info  chart_summary.json\n"
                 "  phase          phase.csv: x,l (or step,s,v) blocks separated by a blank line\n"
                 "  verify         verify_<stage>.json (suspension: suspension_report.json);\n"
                 "                 suspension/main-theorem also verification.csv:\n"
                 "                 x,l,flow_x,flow_l,map_x,map_l,dx,dl\n"
                 "  suspend        suspension_report.json, verification.csv\n"
                 "  mather         beta.csv: omega,beta,err; alpha.csv: c,alpha;\n"
                 "                 mather_set_<k>.csv: x,momentum,gap_flag; mather_report.json\n"
                 "Exit codes: 0 success, 2 configuration error, 3 numerical failure or failed check."};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out", stage;
    std::uint64_t seed = 0;
    int jobs = 0;
    app.add_option("--config", config_path, "flat JSON config with a version field")->required();
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized restarts and sample points");
    auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.fallthrough();
    auto* boundary = app.add_subcommand("boundary-info", "chart constants and checksums");
    auto* phase = app.add_subcommand("phase", "orbit sweep for phase portraits");
    auto* verify = app.add_subcommand("verify", "verification stage with pass/fail exit code");
    verify->add_option("--stage", stage, "expansion | suspension | positivity | main-theorem")
        ->required()
        ->check(CLI::IsMember({"expansion", "suspension", "positivity", "main-theorem"}));
    auto* suspend = app.add_subcommand("suspend", "build the suspension and report its errors");
    auto* mather = app.add_subcommand("mather", "beta/alpha tables and gap detection");
    for (auto* sub : {boundary, phase, verify, suspend, mather})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigFailure;
    }

    RunConfig cfg;
    fs::path out(out_dir);
    try {
        cfg = load_config(config_path);
        if (*seed_opt)
            cfg.seed = seed;
        if (*jobs_opt) {
            cfg.jobs = jobs;
            cfg.suspension.jobs = jobs;
        }
        fs::create_directories(out);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigFailure;
    }

    try {
        if (*boundary)
            return cmd_boundary_info(cfg, out);
        if (*phase)
            return cmd_phase(cfg, out);
        if (*verify) {
            const int code = cmd_verify(cfg, stage, out);
            std::cout << "verify " << stage << ": " << (code == kOk ? "pass" : "FAIL") << "\n";
            return code;
        }
        if (*suspend)
            return cmd_suspend(cfg, out);
        if (*mather)
            return cmd_mather(cfg, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::ConfigError ? kConfigFailure : kNumericFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericFailure;
    }
    return kConfigFailure;
}

}  // namespace billiards::app
