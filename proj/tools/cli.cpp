#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "parisian/adjustment.hpp"
#include "parisian/diffusion.hpp"
#include "parisian/error.hpp"
#include "parisian/simulator.hpp"

#ifndef PARISIAN_VERSION
#define PARISIAN_VERSION "unknown"
#endif

namespace parisian::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

SeverityModel RunConfig::severity_model() const {
    if (severity == "exponential") return SeverityModel::exponential(severity_rate);
    if (severity == "gamma") return SeverityModel::gamma(severity_shape, severity_rate);
    if (severity == "discrete") return SeverityModel::discrete(severity_atoms);
    throw ValidationError("severity", "severity must be exponential, gamma or discrete, got '" + severity + "'");
}

json RunConfig::to_json() const {
    json atoms = json::array();
    for (const auto& a : severity_atoms) atoms.push_back({a.value, a.prob});
    return {
        {"lambda", market.lambda},
        {"c", market.c},
        {"theta", market.theta},
        {"eta", market.eta},
        {"rho", market.rho},
        {"beta", market.beta},
        {"severity", severity},
        {"severity_rate", severity_rate},
        {"severity_shape", severity_shape},
        {"severity_atoms", atoms},
        {"x_min", grid.x_min},
        {"x_max", grid.x_max},
        {"n_x", grid.n_x},
        {"n_atoms", grid.n_atoms},
        {"auto_grid", auto_grid},
        {"tol", solver.tol},
        {"residual_tol", solver.residual_tol},
        {"max_iter", solver.max_policy_iterations},
        {"relaxation", solver.relaxation},
        {"initial", solver.initial == hjb::Initial::psi_bar ? "psi_bar" : "psi_underbar"},
        {"extension", solver.extension == hjb::Extension::psi_bar ? "psi_bar" : "psi_underbar"},
        {"x0", x0},
        {"paths", paths},
        {"horizon", horizon},
        {"seed", seed},
        {"policy", policy},
        {"x_points", x_points},
        {"output_dir", output_dir},
        {"hjb_dir", hjb_dir},
    };
}

namespace {

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config_type", "config key '" + key + "' has the wrong type");
    }
}

using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"lambda", [](RunConfig& c, const json& v, const std::string& k) { c.market.lambda = get_as<double>(v, k); }},
        {"c", [](RunConfig& c, const json& v, const std::string& k) { c.market.c = get_as<double>(v, k); }},
        {"theta", [](RunConfig& c, const json& v, const std::string& k) { c.market.theta = get_as<double>(v, k); }},
        {"eta", [](RunConfig& c, const json& v, const std::string& k) { c.market.eta = get_as<double>(v, k); }},
        {"rho", [](RunConfig& c, const json& v, const std::string& k) { c.market.rho = get_as<double>(v, k); }},
        {"beta", [](RunConfig& c, const json& v, const std::string& k) { c.market.beta = get_as<double>(v, k); }},
        {"severity", [](RunConfig& c, const json& v, const std::string& k) { c.severity = get_as<std::string>(v, k); }},
        {"severity_rate", [](RunConfig& c, const json& v, const std::string& k) { c.severity_rate = get_as<double>(v, k); }},
        {"severity_shape", [](RunConfig& c, const json& v, const std::string& k) { c.severity_shape = get_as<double>(v, k); }},
        {"severity_atoms",
         [](RunConfig& c, const json& v, const std::string& k) {
             c.severity_atoms.clear();
             for (const auto& pair : get_as<std::vector<std::vector<double>>>(v, k)) {
                 if (pair.size() != 2) throw ValidationError("config_type", "severity_atoms entries are [value, prob]");
                 c.severity_atoms.push_back({pair[0], pair[1]});
             }
         }},
        {"x_min", [](RunConfig& c, const json& v, const std::string& k) { c.grid.x_min = get_as<double>(v, k); }},
        {"x_max", [](RunConfig& c, const json& v, const std::string& k) { c.grid.x_max = get_as<double>(v, k); }},
        {"n_x", [](RunConfig& c, const json& v, const std::string& k) { c.grid.n_x = get_as<std::size_t>(v, k); }},
        {"n_atoms", [](RunConfig& c, const json& v, const std::string& k) { c.grid.n_atoms = get_as<std::size_t>(v, k); }},
        {"auto_grid", [](RunConfig& c, const json& v, const std::string& k) { c.auto_grid = get_as<bool>(v, k); }},
        {"tol", [](RunConfig& c, const json& v, const std::string& k) { c.solver.tol = get_as<double>(v, k); }},
        {"residual_tol", [](RunConfig& c, const json& v, const std::string& k) { c.solver.residual_tol = get_as<double>(v, k); }},
        {"max_iter", [](RunConfig& c, const json& v, const std::string& k) { c.solver.max_policy_iterations = get_as<int>(v, k); }},
        {"relaxation", [](RunConfig& c, const json& v, const std::string& k) { c.solver.relaxation = get_as<double>(v, k); }},
        {"initial",
         [](RunConfig& c, const json& v, const std::string& k) {
             const auto s = get_as<std::string>(v, k);
             if (s != "psi_bar" && s != "psi_underbar") throw ValidationError("initial", "initial must be psi_bar or psi_underbar");
             c.solver.initial = s == "psi_bar" ? hjb::Initial::psi_bar : hjb::Initial::psi_underbar;
         }},
        {"extension",
         [](RunConfig& c, const json& v, const std::string& k) {
             const auto s = get_as<std::string>(v, k);
             if (s != "psi_bar" && s != "psi_underbar") throw ValidationError("extension", "extension must be psi_bar or psi_underbar");
             c.solver.extension = s == "psi_bar" ? hjb::Extension::psi_bar : hjb::Extension::psi_underbar;
         }},
        {"x0", [](RunConfig& c, const json& v, const std::string& k) { c.x0 = get_as<double>(v, k); }},
        {"paths", [](RunConfig& c, const json& v, const std::string& k) { c.paths = get_as<std::size_t>(v, k); }},
        {"horizon", [](RunConfig& c, const json& v, const std::string& k) { c.horizon = get_as<double>(v, k); }},
        {"seed", [](RunConfig& c, const json& v, const std::string& k) { c.seed = get_as<std::uint64_t>(v, k); }},
        {"policy", [](RunConfig& c, const json& v, const std::string& k) { c.policy = get_as<std::string>(v, k); }},
        {"x_points", [](RunConfig& c, const json& v, const std::string& k) { c.x_points = get_as<std::vector<double>>(v, k); }},
        {"output_dir", [](RunConfig& c, const json& v, const std::string& k) { c.output_dir = get_as<std::string>(v, k); }},
        {"hjb_dir", [](RunConfig& c, const json& v, const std::string& k) { c.hjb_dir = get_as<std::string>(v, k); }},
    };
    return table;
}

}  // namespace

void apply_json(RunConfig& cfg, const json& j) {
    if (!j.is_object()) throw ValidationError("config_type", "config must be a JSON object");
    std::vector<Violation> unknown;
    for (const auto& [key, value] : j.items()) {
        const auto it = setters().find(key);
        if (it == setters().end()) {
            unknown.push_back({"config_key", "unknown config key '" + key + "'"});
            continue;
        }
        it->second(cfg, value, key);
    }
    if (!unknown.empty()) throw ValidationError(std::move(unknown));
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("cannot parse config file " + path.string() + ": " + e.what());
    }
    RunConfig cfg;
    apply_json(cfg, j);
    return cfg;
}

std::string config_hash(const RunConfig& cfg) {
    auto j = cfg.to_json();
    j.erase("output_dir");  // where results go does not change them
    j.erase("hjb_dir");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class CsvWriter {
public:
    explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot write " + path.string());
    }
    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
        out_ << '\n';
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
        out_ << '\n';
    }
    void raw(const std::string& line) { out_ << line << '\n'; }

private:
    std::ofstream out_;
};

std::vector<std::vector<double>> read_csv(const fs::path& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + " is empty");
    if (header) {
        header->clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header->push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            double v = 0.0;
            const auto res = std::from_chars(p, comma, v);
            if (res.ec != std::errc() || res.ptr != comma) throw IoError("malformed number in " + path.string());
            row.push_back(v);
            p = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

fs::path prepare_output(const RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_metadata(const fs::path& dir, const std::string& command, const RunConfig& cfg, const json& results,
                    const json& timings) {
    json meta = {
        {"command", command},
        {"version", PARISIAN_VERSION},
        {"compiler", __VERSION__},
        {"config", cfg.to_json()},
        {"config_hash", config_hash(cfg)},
        {"seed", cfg.seed},
        {"tolerances", {{"tol", cfg.solver.tol}, {"residual_tol", cfg.solver.residual_tol}}},
        {"timings_seconds", timings},
        {"results", results},
    };
    const auto path = dir / (command + ".json");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << meta.dump(2) << '\n';
}

std::vector<double> grid_points(const hjb::GridSpec& g) {
    std::vector<double> xs(g.n_x);
    const double h = (g.x_max - g.x_min) / static_cast<double>(g.n_x - 1);
    for (std::size_t i = 0; i < g.n_x; ++i) xs[i] = g.x_min + h * static_cast<double>(i);
    return xs;
}

hjb::GridSpec effective_grid(const RunConfig& cfg, const SeverityModel& model) {
    if (!cfg.auto_grid) return cfg.grid;
    return hjb::default_grid_spec(solve_adjustment(cfg.market, model), cfg.grid.n_x, cfg.grid.n_atoms);
}

fs::path hjb_dir(const RunConfig& cfg) { return cfg.hjb_dir.empty() ? fs::path(cfg.output_dir) : fs::path(cfg.hjb_dir); }

// --- subcommands -----------------------------------------------------------

json cmd_validate(const RunConfig& cfg) {
    const auto report = validate(cfg.market, cfg.severity_model());
    json violations = json::array();
    for (const auto& v : report.violations) violations.push_back({{"code", v.code}, {"message", v.message}});
    return {{"ok", report.ok()}, {"kappa", report.kappa}, {"violations", violations}};
}

json cmd_diffusion(const RunConfig& cfg, const fs::path& dir) {
    const auto sol = solve_diffusion(cfg.market, cfg.severity_model());
    CsvWriter csv(dir / "diffusion.csv");
    csv.header({"x", "psi_tilde", "slope"});
    for (double x : grid_points(cfg.grid)) csv.row({x, value_tilde(sol, x), value_tilde_slope(sol, x)});
    return {{"gamma1_tilde", sol.gamma1_tilde},
            {"gamma2_tilde", sol.gamma2_tilde},
            {"retention_crossover", retention_tilde_crossover(sol)},
            {"pasting_gap", value_tilde_slope(sol, 0.0, Side::left) - value_tilde_slope(sol, 0.0, Side::right)}};
}

json cmd_adjustment(const RunConfig& cfg, const fs::path& dir) {
    const Bounds b{solve_adjustment(cfg.market, cfg.severity_model())};
    CsvWriter csv(dir / "adjustment.csv");
    csv.header({"x", "psi_bar", "psi_underbar"});
    for (double x : grid_points(cfg.grid)) csv.row({x, psi_bar(b, x), psi_underbar(b, x)});
    return {{"gamma1", b.coefficients.gamma1},
            {"gamma2", b.coefficients.gamma2},
            {"r_hat_threshold", r_hat_threshold(b.coefficients.gamma1, cfg.market.theta)},
            {"psi_bar_slope_jump", psi_bar_slope_jump(b)}};
}

json cmd_hjb(const RunConfig& cfg, const fs::path& dir, hjb::HjbSolution* keep = nullptr) {
    const auto model = cfg.severity_model();
    const auto spec = effective_grid(cfg, model);
    const auto sol = hjb::solve(cfg.market, model, spec, cfg.solver);
    const auto& g = sol.grid();
    const auto atoms = g.atoms();
    const auto& b = sol.problem->bounds();

    {
        CsvWriter csv(dir / "hjb.csv");
        csv.header({"x", "v", "residual", "drift", "mean_retained", "psi_bar", "psi_underbar"});
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto r = sol.policy_at(i);
            double mean = 0.0;
            for (std::size_t k = 0; k < atoms.size(); ++k) mean += atoms[k].prob * r[k];
            const double x = g.x(i);
            csv.row({x, sol.values[i], sol.residuals[i], sol.drifts[i], mean, psi_bar(b, x), psi_underbar(b, x)});
        }
    }
    {
        CsvWriter csv(dir / "hjb_atoms.csv");
        csv.header({"k", "y", "prob"});
        for (std::size_t k = 0; k < atoms.size(); ++k) csv.row({static_cast<double>(k), atoms[k].value, atoms[k].prob});
    }
    {
        CsvWriter csv(dir / "hjb_policy.csv");
        std::vector<std::string> names{"x"};
        for (std::size_t k = 0; k < atoms.size(); ++k) names.push_back("R" + std::to_string(k));
        csv.header(names);
        for (std::size_t i = 0; i < g.size(); ++i) {
            std::vector<double> row{g.x(i)};
            const auto r = sol.policy_at(i);
            row.insert(row.end(), r.begin(), r.end());
            csv.row(row);
        }
    }

    hjb::PolicyReport rep;
    hjb::extract_policy(sol, &rep);
    json history = json::array();
    for (const auto& h : sol.history) {
        history.push_back({{"max_change", h.max_change}, {"max_increase", h.max_increase},
                           {"max_residual", h.max_residual}, {"sweeps", h.sweeps}});
    }
    json out = {
        {"iterations", sol.iterations},
        {"converged", sol.converged},
        {"max_residual", sol.max_residual},
        {"max_monotonicity_violation", sol.max_monotonicity_violation},
        {"grid", {{"x_min", g.x_min()}, {"x_max", g.x_max()}, {"n_x", g.size()}, {"n_atoms", atoms.size()}}},
        {"decay_range", {{"x_min", std::log(1e-6) / b.coefficients.gamma2}, {"x_max", -std::log(1e-6) / b.coefficients.gamma1}}},
        {"gamma1_atoms", b.coefficients.gamma1},
        {"gamma2_atoms", b.coefficients.gamma2},
        {"policy",
         {{"below_full_retention", rep.below_full_retention},
          {"below_max_deviation", rep.below_max_deviation},
          {"above_x_independent", rep.above_x_independent},
          {"above_max_spread", rep.above_max_spread},
          {"max_deviation_from_r_hat", hjb::policy_deviation_from_r_hat(sol)}}},
        {"history", history},
    };
    if (keep) *keep = sol;
    return out;
}

struct StoredHjb {
    std::vector<double> xs;
    std::vector<double> values;
    std::vector<Atom> atoms;
    std::vector<double> policy;
};

StoredHjb read_hjb(const fs::path& dir) {
    StoredHjb s;
    for (const auto& row : read_csv(dir / "hjb.csv", nullptr)) {
        if (row.size() < 2) throw IoError("hjb.csv rows need x and v");
        s.xs.push_back(row[0]);
        s.values.push_back(row[1]);
    }
    for (const auto& row : read_csv(dir / "hjb_atoms.csv", nullptr)) {
        if (row.size() != 3) throw IoError("hjb_atoms.csv rows are k,y,prob");
        s.atoms.push_back({row[1], row[2]});
    }
    const auto rows = read_csv(dir / "hjb_policy.csv", nullptr);
    if (rows.size() != s.xs.size()) throw IoError("hjb_policy.csv and hjb.csv disagree on the grid");
    for (const auto& row : rows) {
        if (row.size() != s.atoms.size() + 1) throw IoError("hjb_policy.csv row width does not match the atoms");
        s.policy.insert(s.policy.end(), row.begin() + 1, row.end());
    }
    return s;
}

RetentionRule policy_rule(const RunConfig& cfg) {
    const auto model = cfg.severity_model();
    if (cfg.policy == "full-retention") return RetentionRule::full_retention();
    if (cfg.policy == "adjustment") return supersolution_policy(solve_adjustment(cfg.market, model));
    if (cfg.policy == "diffusion") {
        const auto sol = solve_diffusion(cfg.market, model);
        auto above = RetentionRule::stationary([sol](double y) { return retention_tilde(sol, 0.0, y); },
                                               {retention_tilde_crossover(sol)}, "diffusion");
        return RetentionRule::two_regime(RetentionRule::full_retention(), above);
    }
    if (cfg.policy == "hjb-file") {
        auto s = read_hjb(hjb_dir(cfg));
        std::vector<double> ys;
        for (const auto& a : s.atoms) ys.push_back(a.value);
        return RetentionRule::tabulated(std::move(s.xs), std::move(ys), std::move(s.policy));
    }
    throw ValidationError("policy", "policy must be full-retention, adjustment, diffusion or hjb-file");
}

json estimate_json(const sim::Estimate& e) {
    return {{"mean", e.mean}, {"std_error", e.std_error}, {"ci_lo", e.ci_lo}, {"ci_hi", e.ci_hi},
            {"bias_bound", e.bias_bound}, {"n_paths", e.n_paths}, {"n_ruined", e.n_ruined}, {"horizon", e.horizon}};
}

json cmd_simulate(const RunConfig& cfg, const fs::path& dir) {
    require_valid(cfg.market, cfg.severity_model());
    sim::SimConfig sc;
    sc.x0 = cfg.x0;
    sc.rule = policy_rule(cfg);
    sc.params = cfg.market;
    sc.model = cfg.severity_model();
    sc.n_paths = cfg.paths;
    sc.horizon = cfg.horizon;
    sc.seed = cfg.seed;
    const auto e = sim::estimate(sc);
    CsvWriter csv(dir / "simulate.csv");
    csv.header({"x0", "mean", "std_error", "ci_lo", "ci_hi", "bias_bound", "n_paths", "n_ruined", "seed"});
    csv.raw(format_double(cfg.x0) + "," + format_double(e.mean) + "," + format_double(e.std_error) + "," +
            format_double(e.ci_lo) + "," + format_double(e.ci_hi) + "," + format_double(e.bias_bound) + "," +
            std::to_string(e.n_paths) + "," + std::to_string(e.n_ruined) + "," + std::to_string(e.seed));
    json out = estimate_json(e);
    out["policy"] = cfg.policy;
    return out;
}

json compare_rows(const hjb::HjbSolution& sol, const RunConfig& cfg, const fs::path& dir) {
    sim::SimConfig base;
    base.n_paths = cfg.paths;
    base.horizon = cfg.horizon;
    base.seed = cfg.seed;
    const auto rows = sim::compare(sol, cfg.x_points, base);
    CsvWriter csv(dir / "compare.csv");
    csv.header({"x", "hjb", "mc_optimal", "se_optimal", "mc_full_retention", "se_full_retention", "mc_psi_bar_policy",
                "se_psi_bar_policy", "z_score", "dominates_full", "dominates_psi_bar"});
    json out = json::array();
    for (const auto& r : rows) {
        csv.row({r.x, r.hjb_value, r.optimal.mean, r.optimal.std_error, r.full_retention.mean,
                 r.full_retention.std_error, r.psi_bar_policy.mean, r.psi_bar_policy.std_error, r.z_score,
                 r.dominates_full ? 1.0 : 0.0, r.dominates_psi_bar ? 1.0 : 0.0});
        out.push_back({{"x", r.x},
                       {"hjb", r.hjb_value},
                       {"optimal", estimate_json(r.optimal)},
                       {"full_retention", estimate_json(r.full_retention)},
                       {"psi_bar_policy", estimate_json(r.psi_bar_policy)},
                       {"z_score", r.z_score},
                       {"dominates_full", r.dominates_full},
                       {"dominates_psi_bar", r.dominates_psi_bar}});
    }
    return out;
}

json cmd_compare(const RunConfig& cfg, const fs::path& dir) {
    const auto model = cfg.severity_model();
    auto problem = std::make_shared<const hjb::Problem>(cfg.market, model, effective_grid(cfg, model));
    auto stored = read_hjb(hjb_dir(cfg));
    const auto& g = problem->grid();
    const auto atoms = g.atoms();
    bool same = stored.xs.size() == g.size() && stored.atoms.size() == atoms.size();
    for (std::size_t i = 0; same && i < g.size(); ++i) same = std::abs(stored.xs[i] - g.x(i)) <= 1e-12 * (1.0 + std::abs(g.x(i)));
    for (std::size_t k = 0; same && k < atoms.size(); ++k) same = std::abs(stored.atoms[k].value - atoms[k].value) <= 1e-12 * (1.0 + atoms[k].value);
    if (!same) throw ValidationError("hjb_grid", "stored HJB solution does not match the configured grid and severity");

    hjb::HjbSolution sol;
    sol.problem = problem;
    sol.values = std::move(stored.values);
    sol.policy = std::move(stored.policy);
    sol.config = cfg.solver;
    sol.converged = true;
    return compare_rows(sol, cfg, dir);
}

json cmd_report(const RunConfig& cfg, const fs::path& dir) {
    json out;
    out["validate"] = cmd_validate(cfg);
    if (!out["validate"]["ok"].get<bool>()) return out;
    out["diffusion"] = cmd_diffusion(cfg, dir);
    out["adjustment"] = cmd_adjustment(cfg, dir);
    hjb::HjbSolution sol;
    out["hjb"] = cmd_hjb(cfg, dir, &sol);
    out["hjb"].erase("history");
    out["compare"] = compare_rows(sol, cfg, dir);
    out["gamma2_tilde"] = out["diffusion"]["gamma2_tilde"];
    out["gamma1_tilde"] = out["diffusion"]["gamma1_tilde"];
    out["gamma1"] = out["adjustment"]["gamma1"];
    out["gamma2"] = out["adjustment"]["gamma2"];
    out["kappa"] = out["validate"]["kappa"];
    return out;
}

json error_json(const std::string& kind, const std::string& message, const std::vector<Violation>& violations = {}) {
    json v = json::array();
    for (const auto& x : violations) v.push_back({{"code", x.code}, {"message", x.message}});
    return {{"error", kind}, {"message", message}, {"violations", v}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exponential Parisian ruin under optimal mean-variance reinsurance"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file with flat keys");

    json overrides = json::object();
    auto num = [&](const std::string& flag, const std::string& key, const std::string& help) {
        app.add_option_function<double>(flag, [&overrides, key](const double& v) { overrides[key] = v; }, help);
    };
    auto count = [&](const std::string& flag, const std::string& key, const std::string& help) {
        app.add_option_function<std::uint64_t>(flag, [&overrides, key](const std::uint64_t& v) { overrides[key] = v; }, help);
    };
    auto text = [&](const std::string& flag, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
    };
    num("--lambda", "lambda", "claim arrival rate");
    num("--c", "c", "premium rate");
    num("--theta", "theta", "reinsurer expected-value loading");
    num("--eta", "eta", "reinsurer variance loading");
    num("--rho", "rho", "Parisian clock rate");
    num("--beta", "beta", "discount rate");
    text("--severity", "severity", "exponential | gamma | discrete");
    num("--severity-rate", "severity_rate", "rate of the exponential or gamma severity");
    num("--severity-shape", "severity_shape", "shape of the gamma severity");
    num("--x-min", "x_min", "left end of the HJB grid");
    num("--x-max", "x_max", "right end of the HJB grid");
    count("--n-x", "n_x", "number of grid nodes");
    count("--n-atoms", "n_atoms", "number of severity atoms");
    num("--tol", "tol", "policy-iteration value tolerance");
    num("--residual-tol", "residual_tol", "HJB residual tolerance");
    count("--max-iter", "max_iter", "maximum policy iterations");
    text("--initial", "initial", "psi_bar | psi_underbar");
    text("--extension", "extension", "psi_bar | psi_underbar");
    num("--x0", "x0", "initial surplus for simulate");
    count("--paths", "paths", "Monte Carlo paths");
    num("--horizon", "horizon", "simulation horizon, 0 for ceil(9.3/beta)");
    count("--seed", "seed", "master seed");
    text("--policy", "policy", "full-retention | adjustment | diffusion | hjb-file");
    text("--output-dir", "output_dir", "directory for CSV and metadata files");
    text("--hjb-dir", "hjb_dir", "directory holding hjb.csv for simulate/compare");
    app.add_option_function<std::vector<double>>(
        "--x-points", [&overrides](const std::vector<double>& v) { overrides["x_points"] = v; },
        "comparison points")->delimiter(',');
    app.add_flag_function("--auto-grid", [&overrides](std::int64_t) { overrides["auto_grid"] = true; },
                          "derive the grid bounds from gamma1 and gamma2");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"validate", "check the parameter constraints and print kappa"},
        {"diffusion", "closed-form diffusion approximation"},
        {"adjustment", "adjustment coefficients and analytic bounds"},
        {"hjb", "solve the HJB equation on a grid"},
        {"simulate", "Monte Carlo estimate under a retention policy"},
        {"compare", "cross-validate a stored HJB solution by simulation"},
        {"report", "run the whole pipeline and summarize"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << error_json("usage", e.what()).dump() << '\n';
        return validation_failure;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        apply_json(cfg, overrides);

        const auto t0 = Clock::now();
        const fs::path dir = prepare_output(cfg);
        json results;
        int code = ok;
        if (command == "validate") {
            results = cmd_validate(cfg);
            if (!results["ok"].get<bool>()) code = validation_failure;
        } else if (command == "diffusion") {
            results = cmd_diffusion(cfg, dir);
        } else if (command == "adjustment") {
            results = cmd_adjustment(cfg, dir);
        } else if (command == "hjb") {
            results = cmd_hjb(cfg, dir);
            if (!results["converged"].get<bool>()) code = numerical_failure;
        } else if (command == "simulate") {
            results = cmd_simulate(cfg, dir);
        } else if (command == "compare") {
            results = cmd_compare(cfg, dir);
        } else {
            results = cmd_report(cfg, dir);
            if (!results["validate"]["ok"].get<bool>()) code = validation_failure;
        }
        write_metadata(dir, command, cfg, results, {{"total", seconds_since(t0)}});
        out << results.dump(2) << '\n';
        if (code == validation_failure) {
            std::vector<Violation> v;
            const auto& list = command == "report" ? results["validate"]["violations"] : results["violations"];
            for (const auto& x : list) v.push_back({x["code"], x["message"]});
            err << error_json("validation", "parameter constraints violated", v).dump() << '\n';
        } else if (code == numerical_failure) {
            err << error_json("numerical", "HJB policy iteration did not converge").dump() << '\n';
        }
        return code;
    } catch (const ValidationError& e) {
        err << error_json("validation", e.what(), e.violations()).dump() << '\n';
        return validation_failure;
    } catch (const IoError& e) {
        err << error_json("io", e.what()).dump() << '\n';
        return io_failure;
    } catch (const NumericalError& e) {
        err << error_json("numerical", e.what()).dump() << '\n';
        return numerical_failure;
    } catch (const fs::filesystem_error& e) {
        err << error_json("io", e.what()).dump() << '\n';
        return io_failure;
    } catch (const Error& e) {
        err << error_json("numerical", e.what()).dump() << '\n';
        return numerical_failure;
    }
}

}  // namespace parisian::cli
