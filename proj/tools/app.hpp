#pragma once

#include "billiards/boundary.hpp"
#include "billiards/hamiltonian.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace billiards::app {

inline constexpr int kConfigVersion = 1;

enum ExitCode { kOk = 0, kConfigFailure = 2, kNumericFailure = 3 };

struct PhaseSweep {
    std::string coords = "lazutkin";  ///< "lazutkin": x,l blocks; "billiard": step,s,v blocks
    int orbits = 8;
    int steps = 400;
    double x0 = 0.0;
    double l_min = 1e-5;
    double l_max = 1e-2;
    double v_min = 0.05;
    double v_max = 1.0;
};

struct VerifySampling {
    double expansion_s = 0.37;
    int sample_points = 200;
    double sample_l_min = 1e-5;
    double sample_l_max = 1e-3;
    double conjugation_tol = 1e-5;
};

struct MatherGrid {
    std::vector<double> omegas;  ///< explicit grid; otherwise 1/n with n geometric
    double omega_min = 1e-3;
    double omega_max = 0.5;
    int omega_count = 40;
    int alpha_count = 41;
    int q_cap = 377;
    int restarts = 4;
    std::vector<double> gap_omegas;
    std::vector<int> gap_q_caps{25, 100, 300};
};

struct RunConfig {
    RadiusProfile profile;
    SuspensionConfig suspension;
    std::uint64_t seed = 1;
    int jobs = 1;
    PhaseSweep phase;
    VerifySampling verify;
    MatherGrid mather;
    nlohmann::json echo;  ///< the accepted configuration, for reports
};

/// Parses {"cos": [...], "sin": [...]} and validates it. Throws ConfigError.
RadiusProfile parse_profile(const nlohmann::json& j);

/// Flat config object with "version"; unknown keys, bad types and invalid
/// suspension parameters throw ConfigError. Relative profile_file paths
/// resolve against base_dir.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

bool is_circle(const RadiusProfile& p);

/// %.17g, with non-finite values spelled nan / inf / -inf.
std::string format_number(double v);
/// JSON text with every float at 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void blank();

private:
    std::ofstream out_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Each command writes into `out` (created if missing) and returns an exit code.
int cmd_boundary_info(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_phase(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_verify(const RunConfig& cfg, const std::string& stage, const std::filesystem::path& out);
int cmd_suspend(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_mather(const RunConfig& cfg, const std::filesystem::path& out);

/// Full command line, including exit-code mapping of exceptions.
int run(int argc, char** argv);

}  // namespace billiards::app
