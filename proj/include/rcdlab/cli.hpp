#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcdlab/measures.hpp"

namespace rcdlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitUsage = 2;

inline const std::vector<std::string> kCommands = {"spectrum", "keylemma", "hermite",   "stein",
                                                   "obsdiam",  "converse", "needles",  "full-report"};

bool is_known_command(const std::string& name);

struct ExperimentConfig {
    std::string run_id;  // empty: derived from command and preset
    PotentialSpec potential;
    double half_width = 10.0;
    std::size_t points = 4001;

    std::size_t k = 6;
    std::vector<double> p_list{1.0, 1.5};
    std::vector<int> hermite_degrees{2, 3};
    std::vector<double> kappa_list{0.1, 0.3, 0.5};
    std::vector<double> converse_kappa_list{0.1, 0.3};  // each in (0, 1/2)
    double delta = 0.5;
    double alpha = 0.5;
    double theta = 0.02;
    std::size_t trials = 200;
    std::optional<std::uint64_t> seed;
    std::size_t needle_companion_points = 201;

    std::string sweep_parameter;  // "a", "epsilon" or "shift"; empty for single runs
    std::vector<double> sweep_values;

    bool resolution_check = false;

    /// Throws InvalidArgument on the first out-of-range field.
    void validate(const std::string& command) const;
};

/// Reads the [grid], [potential], [command] and [sweep] sections of an INI file.
/// Table potentials name a file (one value per node) relative to the config.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");

struct Inequality {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct RunRecord {
    double parameter = 0.0;
    std::vector<std::pair<std::string, double>> quantities;
    std::vector<Inequality> checks;

    void set(const std::string& key, double value);
    std::optional<double> get(const std::string& key) const;
    void check(const std::string& name, double lhs, double rhs, double tolerance);
    /// Records pass directly for checks that are not a single lhs <= rhs comparison.
    void check_flag(const std::string& name, double lhs, double rhs, double tolerance, bool pass);
};

struct StabilityReport {
    std::string run_id;
    std::string command;
    std::string preset;
    std::string sweep_parameter;
    std::optional<std::uint64_t> seed;
    std::size_t points = 0;
    double half_width = 0.0;
    std::vector<RunRecord> runs;  // sorted by parameter
    std::vector<std::pair<std::string, double>> slopes;  // log-log slope against lambda1 - 1

    const Inequality* first_failure() const;
};

RunRecord run_point(const ExperimentConfig& config, const std::string& command);
/// Single run, or a sweep when the config lists sweep values (at least 3 points).
StabilityReport run(const ExperimentConfig& config, const std::string& command);

/// Least-squares slope of log y against log x; NaN unless every pair is positive and finite.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// JSON with a fixed key order and doubles rounded to 12 significant digits.
std::string serialize_report(const StabilityReport& report);
StabilityReport parse_report(const std::string& text);

const std::vector<std::string>& csv_columns();
std::string csv_table(const StabilityReport& report);

struct Outcome {
    int status = kExitOk;
    std::string message;
    std::vector<std::string> written;
};

/// Validates, computes, then writes <out>/<run-id>.report and <run-id>.csv. Usage errors
/// return kExitUsage before any file is created.
Outcome execute(const std::string& config_path, const std::string& command, const std::string& out_dir,
                std::optional<std::uint64_t> seed, bool resolution_check);

}  // namespace rcdlab::cli
