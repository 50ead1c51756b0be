#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "parisian/claims.hpp"
#include "parisian/hjb.hpp"

namespace parisian::cli {

enum ExitCode : int { ok = 0, validation_failure = 1, numerical_failure = 2, io_failure = 3 };

/// Everything a run needs. Loaded from a flat JSON object; see README for
/// the key list. Unknown keys are rejected.
struct RunConfig {
    MarketParams market;
    std::string severity = "exponential";  ///< exponential | gamma | discrete
    double severity_rate = 1.0;
    double severity_shape = 1.0;
    std::vector<Atom> severity_atoms;

    hjb::GridSpec grid;
    bool auto_grid = false;  ///< derive x_min/x_max from gamma1, gamma2
    hjb::SolverConfig solver;

    double x0 = 0.0;
    std::size_t paths = 10000;
    double horizon = 0.0;
    std::uint64_t seed = 1;
    std::string policy = "hjb-file";  ///< full-retention | adjustment | diffusion | hjb-file
    std::vector<double> x_points{0.0, 1.0, 2.0};

    std::string output_dir = ".";
    std::string hjb_dir;  ///< where simulate/compare read hjb.csv; defaults to output_dir

    SeverityModel severity_model() const;
    nlohmann::json to_json() const;
};

/// Overlays the keys of `j` onto `cfg`. Throws ValidationError on unknown
/// keys or wrong types.
void apply_json(RunConfig& cfg, const nlohmann::json& j);

/// Reads a config file; throws IoError when the file cannot be read or parsed.
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical JSON dump of the config without the
/// output locations, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Shortest round-trip decimal form.
std::string format_double(double v);

struct IoError : Error {
    using Error::Error;
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace parisian::cli
