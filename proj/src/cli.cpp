#include "rcdlab/cli.hpp"

#include <algorithm>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <json.hpp>
#include <set>
#include <sstream>

#include "rcdlab/errors.hpp"
#include "rcdlab/hermite.hpp"
#include "rcdlab/needles.hpp"
#include "rcdlab/obsdiam.hpp"
#include "rcdlab/spectrum.hpp"
#include "rcdlab/transport.hpp"

namespace rcdlab::cli {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using ordered_json = nlohmann::ordered_json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kChainTol = 1e-3;
constexpr double kResolutionTol = 1e-5;

std::string g12(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round12(double x) {
    if (!std::isfinite(x)) return x;
    return std::strtod(g12(x).c_str(), nullptr);
}

// Suffix used in quantity keys: 1 -> "1", 1.5 -> "1.5", kappa 0.3 -> "30".
std::string p_tag(double p) { return g12(p); }
std::string kappa_tag(double kappa) { return std::to_string(static_cast<int>(std::lround(kappa * 100.0))); }

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        const std::string tok = item.substr(b, e - b + 1);
        try {
            std::size_t used = 0;
            if constexpr (std::is_same_v<T, int>) {
                out.push_back(std::stoi(tok, &used));
            } else {
                out.push_back(std::stod(tok, &used));
            }
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidArgument("config key '" + key + "' has a malformed entry '" + tok + "'");
        }
    }
    return out;
}

template <class T>
T get_value(const pt::ptree& tree, const std::string& key, T fallback) {
    const auto node = tree.get_optional<std::string>(key);
    if (!node) return fallback;
    try {
        return boost::lexical_cast<T>(*node);
    } catch (const boost::bad_lexical_cast&) {
        throw InvalidArgument("config key '" + key + "' has malformed value '" + *node + "'");
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

bool runs_section(const std::string& command, const std::string& section) {
    return command == "full-report" || command == section;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void add_spectrum(RunRecord& r, const SpectralDecomposition& d) {
    for (std::size_t j = 0; j < d.count(); ++j) r.set("lambda_" + std::to_string(j), d.eigenvalues[j]);
    for (std::size_t j = 0; j < d.convergence.size(); ++j) {
        r.set("convergence_" + std::to_string(j), d.convergence[j]);
    }
    r.set("orthonormality_residual", d.orthonormality_residual);
    r.check("spectrum: lichnerowicz 1 <= lambda1", 1.0, d.lambda1(), 1e-6);
}

void add_keylemma(RunRecord& r, const SpectralDecomposition& d, const ExperimentConfig& c) {
    for (double p : c.p_list) {
        const auto kl = key_lemma_report(d, p);
        r.set("kl_lhs_p" + p_tag(p), kl.lhs);
        if (kl.rhs) {
            r.set("kl_rhs_p" + p_tag(p), *kl.rhs);
            r.check("keylemma: lhs <= rhs at p=" + p_tag(p), kl.lhs, *kl.rhs, 1e-6);
        }
    }
}

void add_hermite(RunRecord& r, const SpectralDecomposition& d, const ExperimentConfig& c) {
    for (int n : c.hermite_degrees) {
        const auto h = hermite_residual_report(d, n, kChainTol);
        const std::string t = std::to_string(n);
        r.set("hermite_dist_n" + t, h.normalized_distance);
        r.set("hermite_eigdist_n" + t, h.eigenvalue_distance);
        r.set("hermite_identity_gap_n" + t, h.identity_gap);
        r.check("hermite: eigenvalue within residual of n lambda1 at n=" + t, h.eigenvalue_distance,
                h.normalized_distance, kChainTol);
    }
}

void add_stein(RunRecord& r, const SpectralDecomposition& d, const Measure1D& m) {
    const auto s = stein_report(d, kChainTol);
    r.set("stein_bound", s.explicit_bound);
    r.set("gamma_deficit", s.gamma_deficit);
    r.set("w1_actual", s.w1_actual);
    r.set("tv_actual", s.tv_actual);
    r.check("stein: w1 <= 4 gamma deficit", s.w1_actual, 4.0 * s.gamma_deficit, kChainTol);
    r.check("stein: w1 <= explicit bound", s.w1_actual, s.explicit_bound, kChainTol);
    const auto gauss = normalize(make_potential(PotentialSpec::gaussian(), m.grid()));
    const auto t = monotone_map(gauss, m);
    r.set("caffarelli_max_slope", t.max_slope);
    r.check("stein: caffarelli max slope <= 1", t.max_slope, 1.0, kChainTol);
}

void add_obsdiam(RunRecord& r, const Measure1D& m, const ExperimentConfig& c) {
    for (double kappa : c.kappa_list) {
        const std::string t = kappa_tag(kappa);
        const auto obs = observable_diameter(m, kappa);
        const auto sep = separation(m, kappa / 2.0);
        r.set("dobs_k" + t, obs.dobs);
        r.set("sep_k" + t, sep.sep);
        r.set("gaussian_sep_k" + t, sep.gaussian_sep);
        r.check("obsdiam: dobs(m) <= sep(m) at kappa=" + g12(kappa), obs.dobs, sep.sep, kChainTol);
        r.check("obsdiam: sep(m) <= sep(gamma) at kappa=" + g12(kappa), sep.sep, sep.gaussian_sep, kChainTol);
    }
    const auto iso = isoperimetric_check(m);
    r.set("isoperimetric_ratio", iso.min_profile_ratio);
    r.check("obsdiam: isoperimetric profile ratio >= 1", 1.0, iso.min_profile_ratio, kChainTol);
}

void add_converse(RunRecord& r, const Measure1D& m, const SpectralDecomposition& d, const ExperimentConfig& c) {
    for (double kappa : c.converse_kappa_list) {
        const std::string t = kappa_tag(kappa);
        const auto cd = converse_diagnostics(m, kappa, d.lambda1());
        r.set("eta_k" + t, cd.eta);
        r.set("phi_dev_core_k" + t, cd.sup_phi_dev_core);
        r.set("phi_dev_extended_k" + t, cd.sup_phi_dev_extended);
        r.set("b_eta_k" + t, cd.b_eta);
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& mb : cd.mass_bounds) worst = std::max(worst, mb.lhs - mb.rhs);
        r.check_flag("converse: witness mass bounds at kappa=" + g12(kappa), worst, 0.0, 1e-6,
                     cd.mass_bounds_hold);
        r.set("var_deficit", cd.var_deficit);
    }
}

void add_needles(RunRecord& r, const Measure1D& m, const SpectralDecomposition& d, const ExperimentConfig& c) {
    const auto companion =
        normalize(make_potential(PotentialSpec::gaussian(), build_grid(c.half_width, c.needle_companion_points)));
    const auto p = product_measure({m, companion});
    const auto nf = disintegrate_axis(p, 0, d.f1());
    const auto dis = disintegration_check(p, nf, {{0.0, c.half_width}, {-1.0, 1.0}});
    r.set("disintegration_defect", dis.defect);
    r.check("needles: disintegration identity", dis.defect, 0.0, 1e-8);

    const auto est = needle_estimates_report(nf, d, c.delta);
    r.set("needle_int_f2", est.int_f2);
    r.set("needle_int_grad2", est.int_grad2);
    r.set("needle_multiplicity", static_cast<double>(est.multiplicity));
    r.check("needles: f2 lower bound", est.f2_lower, est.int_f2, 1e-8);
    r.check("needles: f2 upper bound", est.int_f2, est.f2_upper, 1e-8);
    r.check("needles: gradient lower bound", est.int_f2, est.int_grad2, 1e-8);
    r.check("needles: gradient upper bound", est.int_grad2, est.grad_upper, 1e-8);
    r.check("needles: passing mass >= 1 - delta", 1.0 - c.delta, est.passing_mass, 0.0);

    const auto g = guiding_function_check(p, 0, d.f1(), c.trials, *c.seed);
    r.set("guiding_score", g.score_g);
    r.set("guiding_best_competitor", g.max_competitor_score);
    r.set("guiding_f_monotone", g.f_monotone ? 1.0 : 0.0);
    r.check("needles: guiding function beats competitors", g.max_competitor_score, g.score_g, 1e-8);

    const auto fg = fg_h1_report(nf, d, c.theta);
    r.set("fg_l2_dev", fg.l2_dev);
    r.set("fg_h1_dev", fg.h1_dev);
    r.set("fg_per_needle_dev", fg.per_needle_dev);
    r.set("fg_c_q_mean_dev", fg.c_q_mean_dev);
    r.set("fg_w1_g", fg.w1_g);
    r.set("fg_tv_g", fg.tv_g);
}

PotentialSpec with_parameter(PotentialSpec spec, const std::string& name, double value) {
    if (name == "a") {
        spec.a = value;
    } else if (name == "epsilon") {
        spec.epsilon = value;
    } else {
        spec.shift = value;
    }
    return spec;
}

std::string section_of(const std::string& check_name) { return check_name.substr(0, check_name.find(':')); }

std::optional<bool> section_pass(const RunRecord& r, const std::string& section) {
    std::optional<bool> out;
    for (const auto& c : r.checks) {
        if (section != "all" && section_of(c.name) != section) continue;
        out = out.value_or(true) && c.pass;
    }
    return out;
}

double json_number(const ordered_json& j) { return j.is_null() ? kNan : j.get<double>(); }

}  // namespace

bool is_known_command(const std::string& name) {
    return std::find(kCommands.begin(), kCommands.end(), name) != kCommands.end();
}

void ExperimentConfig::validate(const std::string& command) const {
    require(is_known_command(command), "unknown command '" + command + "'");
    require(std::isfinite(half_width) && half_width > 0.0, "[grid] half_width must be positive");
    require(points >= 3 && points % 2 == 1, "[grid] points must be odd and at least 3");
    require(k >= 2 && k <= points / 4, "[command] k must lie in [2, points/4]");
    for (double p : p_list) require(std::isfinite(p) && p >= 1.0, "[command] p entries must be >= 1");
    for (int n : hermite_degrees) require(n >= 1 && n <= kHermiteMaxDegree, "[command] hermite degrees must lie in [1, 8]");
    require(!kappa_list.empty(), "[command] kappa list is empty");
    for (double kappa : kappa_list) require(kappa > 0.0 && kappa < 1.0, "[command] kappa entries must lie in (0, 1)");
    require(!converse_kappa_list.empty(), "[command] converse_kappa list is empty");
    for (double kappa : converse_kappa_list) {
        require(kappa > 0.0 && kappa < 0.5, "[command] converse_kappa entries must lie in (0, 1/2)");
    }
    require(delta > 0.0 && delta < 1.0, "[command] delta must lie in (0, 1)");
    require(alpha > 0.0 && alpha < 1.0, "[command] alpha must lie in (0, 1)");
    require(theta > 0.0, "[command] theta must be positive");
    require(needle_companion_points >= 3 && needle_companion_points % 2 == 1,
            "[command] needle_points must be odd and at least 3");
    if (runs_section(command, "needles")) {
        require(seed.has_value(), "a seed is mandatory for the guiding-function competitors");
        require(trials >= 1, "[command] trials must be positive");
    }
    if (potential.kind == PresetKind::Table) {
        require(potential.table.size() == points, "table potential needs one value per grid node");
        require(sweep_values.empty(), "table potentials cannot be swept");
        require(!resolution_check, "the resolution check needs an analytic preset");
    }
    if (!sweep_parameter.empty() || !sweep_values.empty()) {
        require(sweep_parameter == "a" || sweep_parameter == "epsilon" || sweep_parameter == "shift",
                "[sweep] parameter must be a, epsilon or shift");
        require(sweep_parameter != "a" || potential.kind == PresetKind::ScaledGaussian,
                "[sweep] parameter a needs the scaled_gaussian preset");
        require(sweep_parameter != "epsilon" || potential.kind == PresetKind::CosinePerturbed,
                "[sweep] parameter epsilon needs the cosine_perturbed preset");
        require(sweep_values.size() >= 3, "a sweep needs at least 3 parameter values");
        std::set<double> distinct(sweep_values.begin(), sweep_values.end());
        require(distinct.size() == sweep_values.size(), "[sweep] values must be distinct");
        for (double v : sweep_values) require(std::isfinite(v), "[sweep] values must be finite");
    }
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw InvalidArgument(std::string("config is not valid INI: ") + e.what());
    }
    ExperimentConfig c;
    c.half_width = get_value<double>(tree, "grid.half_width", c.half_width);
    c.points = get_value<std::size_t>(tree, "grid.points", c.points);

    const std::string preset = get_value<std::string>(tree, "potential.preset", "gaussian");
    c.potential.kind = parse_preset_kind(preset);
    c.potential.a = get_value<double>(tree, "potential.a", 0.0);
    c.potential.epsilon = get_value<double>(tree, "potential.epsilon", 0.0);
    c.potential.shift = get_value<double>(tree, "potential.shift", 0.0);
    if (c.potential.kind == PresetKind::Table) {
        const auto file = tree.get_optional<std::string>("potential.table_file");
        require(file.has_value(), "table preset needs [potential] table_file");
        const fs::path path = fs::path(base_dir) / *file;
        c.potential.table = read_potential_table(read_file(path), build_grid(c.half_width, c.points));
    } else if (c.potential.kind == PresetKind::Custom) {
        throw InvalidArgument("custom potentials cannot be configured from a file");
    }

    c.run_id = get_value<std::string>(tree, "command.run_id", "");
    c.k = get_value<std::size_t>(tree, "command.k", c.k);
    if (auto v = tree.get_optional<std::string>("command.p")) c.p_list = parse_list<double>(*v, "p");
    if (auto v = tree.get_optional<std::string>("command.hermite")) c.hermite_degrees = parse_list<int>(*v, "hermite");
    if (auto v = tree.get_optional<std::string>("command.kappa")) c.kappa_list = parse_list<double>(*v, "kappa");
    if (auto v = tree.get_optional<std::string>("command.converse_kappa")) {
        c.converse_kappa_list = parse_list<double>(*v, "converse_kappa");
    }
    c.delta = get_value<double>(tree, "command.delta", c.delta);
    c.alpha = get_value<double>(tree, "command.alpha", c.alpha);
    c.theta = get_value<double>(tree, "command.theta", c.theta);
    c.trials = get_value<std::size_t>(tree, "command.trials", c.trials);
    c.needle_companion_points = get_value<std::size_t>(tree, "command.needle_points", c.needle_companion_points);
    if (tree.get_optional<std::string>("command.seed")) c.seed = get_value<std::uint64_t>(tree, "command.seed", 0);

    if (auto sweep = tree.get_child_optional("sweep")) {
        c.sweep_parameter = get_value<std::string>(*sweep, "parameter", "");
        c.sweep_values = parse_list<double>(get_value<std::string>(*sweep, "values", ""), "values");
        require(!c.sweep_values.empty(), "[sweep] values list is empty");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_file(path), fs::path(path).parent_path().string());
}

void RunRecord::set(const std::string& key, double value) {
    for (auto& [k, v] : quantities) {
        if (k == key) {
            v = value;
            return;
        }
    }
    quantities.emplace_back(key, value);
}

std::optional<double> RunRecord::get(const std::string& key) const {
    for (const auto& [k, v] : quantities) {
        if (k == key) return v;
    }
    return std::nullopt;
}

void RunRecord::check(const std::string& name, double lhs, double rhs, double tolerance) {
    check_flag(name, lhs, rhs, tolerance, lhs <= rhs + tolerance);
}

void RunRecord::check_flag(const std::string& name, double lhs, double rhs, double tolerance, bool pass) {
    checks.push_back(Inequality{name, lhs, rhs, tolerance, pass});
}

const Inequality* StabilityReport::first_failure() const {
    for (const auto& r : runs) {
        for (const auto& c : r.checks) {
            if (!c.pass) return &c;
        }
    }
    return nullptr;
}

RunRecord run_point(const ExperimentConfig& c, const std::string& command) {
    const Grid1D grid = build_grid(c.half_width, c.points);
    const Measure1D m = normalize(make_potential(c.potential, grid));
    const bool convergence = runs_section(command, "spectrum");
    const auto d = eigenpairs(assemble_dirichlet(m), c.k, convergence);

    RunRecord r;
    r.parameter = c.potential.kind == PresetKind::Gaussian ? c.potential.shift : c.potential.parameter();
    if (c.sweep_parameter == "shift") r.parameter = c.potential.shift;
    r.set("lambda1", d.lambda1());
    r.set("gap_deficit", d.lambda1() - 1.0);
    if (runs_section(command, "spectrum")) add_spectrum(r, d);
    if (runs_section(command, "keylemma")) add_keylemma(r, d, c);
    if (runs_section(command, "hermite")) add_hermite(r, d, c);
    if (runs_section(command, "stein")) add_stein(r, d, m);
    if (runs_section(command, "obsdiam")) add_obsdiam(r, m, c);
    if (runs_section(command, "converse")) add_converse(r, m, d, c);
    if (runs_section(command, "needles")) add_needles(r, m, d, c);

    if (c.resolution_check) {
        const Grid1D fine_grid = build_grid(c.half_width, 2 * c.points - 1);
        const auto fine = eigenpairs(assemble_dirichlet(normalize(make_potential(c.potential, fine_grid))), c.k, false);
        double worst = 0.0;
        for (std::size_t j = 0; j < d.count(); ++j) {
            worst = std::max(worst, std::abs(fine.eigenvalues[j] - d.eigenvalues[j]));
        }
        r.set("lambda1_fine", fine.lambda1());
        r.set("dlambda_max", worst);
        r.check("resolution: eigenvalue change between n and 2n", worst, kResolutionTol, 0.0);
    }
    return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return kNan;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i]))) return kNan;
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    const double n = static_cast<double>(x.size());
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxx > 0.0 ? sxy / sxx : kNan;
}

StabilityReport run(const ExperimentConfig& config, const std::string& command) {
    config.validate(command);
    StabilityReport rep;
    rep.command = command;
    rep.preset = config.potential.name();
    rep.sweep_parameter = config.sweep_parameter;
    rep.seed = config.seed;
    rep.points = config.points;
    rep.half_width = config.half_width;
    rep.run_id = config.run_id.empty() ? command + "_" + rep.preset + (config.sweep_values.empty() ? "" : "_sweep")
                                       : config.run_id;
    if (config.sweep_values.empty()) {
        rep.runs.push_back(run_point(config, command));
        return rep;
    }

    std::vector<double> values = config.sweep_values;
    std::sort(values.begin(), values.end());
    std::vector<std::future<RunRecord>> jobs;
    for (double v : values) {
        ExperimentConfig point = config;
        point.potential = with_parameter(config.potential, config.sweep_parameter, v);
        point.sweep_values.clear();
        jobs.push_back(std::async(std::launch::async, [point, command, v] {
            RunRecord r = run_point(point, command);
            r.parameter = v;
            return r;
        }));
    }
    for (auto& j : jobs) rep.runs.push_back(j.get());

    std::vector<double> gap;
    for (const auto& r : rep.runs) gap.push_back(*r.get("gap_deficit"));
    for (const auto& [key, unused] : rep.runs.front().quantities) {
        if (key == "gap_deficit") continue;
        std::vector<double> y;
        for (const auto& r : rep.runs) y.push_back(r.get(key).value_or(kNan));
        rep.slopes.emplace_back(key, loglog_slope(gap, y));
    }
    return rep;
}

std::string serialize_report(const StabilityReport& rep) {
    ordered_json j;
    j["run_id"] = rep.run_id;
    j["command"] = rep.command;
    j["preset"] = rep.preset;
    j["sweep_parameter"] = rep.sweep_parameter;
    j["seed"] = rep.seed ? ordered_json(*rep.seed) : ordered_json(nullptr);
    j["grid"] = {{"half_width", round12(rep.half_width)}, {"points", rep.points}};
    j["runs"] = ordered_json::array();
    for (const auto& r : rep.runs) {
        ordered_json run;
        run["parameter"] = round12(r.parameter);
        ordered_json q = ordered_json::object();
        for (const auto& [k, v] : r.quantities) q[k] = round12(v);
        run["quantities"] = q;
        run["checks"] = ordered_json::array();
        for (const auto& c : r.checks) {
            run["checks"].push_back({{"name", c.name},
                                     {"lhs", round12(c.lhs)},
                                     {"rhs", round12(c.rhs)},
                                     {"tolerance", round12(c.tolerance)},
                                     {"pass", c.pass}});
        }
        j["runs"].push_back(run);
    }
    ordered_json s = ordered_json::object();
    for (const auto& [k, v] : rep.slopes) s[k] = round12(v);
    j["slopes"] = s;
    const Inequality* fail = rep.first_failure();
    j["pass"] = fail == nullptr;
    j["first_failure"] = fail ? ordered_json(fail->name) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

StabilityReport parse_report(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("report is not valid JSON: ") + e.what());
    }
    StabilityReport rep;
    rep.run_id = j.at("run_id").get<std::string>();
    rep.command = j.at("command").get<std::string>();
    rep.preset = j.at("preset").get<std::string>();
    rep.sweep_parameter = j.at("sweep_parameter").get<std::string>();
    if (!j.at("seed").is_null()) rep.seed = j.at("seed").get<std::uint64_t>();
    rep.half_width = json_number(j.at("grid").at("half_width"));
    rep.points = j.at("grid").at("points").get<std::size_t>();
    for (const auto& run : j.at("runs")) {
        RunRecord r;
        r.parameter = json_number(run.at("parameter"));
        for (const auto& [k, v] : run.at("quantities").items()) r.quantities.emplace_back(k, json_number(v));
        for (const auto& c : run.at("checks")) {
            r.checks.push_back(Inequality{c.at("name").get<std::string>(), json_number(c.at("lhs")),
                                          json_number(c.at("rhs")), json_number(c.at("tolerance")),
                                          c.at("pass").get<bool>()});
        }
        rep.runs.push_back(std::move(r));
    }
    for (const auto& [k, v] : j.at("slopes").items()) rep.slopes.emplace_back(k, json_number(v));
    return rep;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "parameter",    "lambda1",      "kl_lhs_p1",     "kl_rhs_p1",     "hermite_dist_n2", "hermite_dist_n3",
        "stein_bound",  "w1_actual",    "tv_actual",     "sep_k30",       "dobs_k30",        "eta_k30",
        "var_deficit",  "gap_deficit",  "pass_spectrum", "pass_keylemma", "pass_hermite",    "pass_stein",
        "pass_obsdiam", "pass_converse", "pass_needles", "pass_all"};
    return cols;
}

std::string csv_table(const StabilityReport& rep) {
    const bool resolution = !rep.runs.empty() && rep.runs.front().get("dlambda_max").has_value();
    std::vector<std::string> cols = csv_columns();
    if (resolution) {
        for (const char* extra : {"lambda1_fine", "dlambda_max", "pass_resolution"}) cols.emplace_back(extra);
    }
    auto cell = [](std::optional<double> v) { return v ? g12(*v) : std::string(); };
    auto flag = [](std::optional<bool> v) { return v ? std::string(*v ? "1" : "0") : std::string(); };

    std::ostringstream out;
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : rep.runs) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const std::string& col = cols[i];
            out << (i ? "," : "");
            if (col == "parameter") {
                out << g12(r.parameter);
            } else if (col.rfind("pass_", 0) == 0) {
                out << flag(section_pass(r, col.substr(5)));
            } else {
                out << cell(r.get(col));
            }
        }
        out << "\n";
    }
    if (!rep.slopes.empty()) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const std::string& col = cols[i];
            out << (i ? "," : "");
            if (col == "parameter") {
                out << "slope_vs_gap";
                continue;
            }
            for (const auto& [k, v] : rep.slopes) {
                if (k == col && std::isfinite(v)) out << g12(v);
            }
        }
        out << "\n";
    }
    return out.str();
}

Outcome execute(const std::string& config_path, const std::string& command, const std::string& out_dir,
                std::optional<std::uint64_t> seed, bool resolution_check) {
    Outcome o;
    if (!is_known_command(command)) {
        o.status = kExitUsage;
        o.message = "unknown command '" + command + "'";
        return o;
    }
    ExperimentConfig config;
    try {
        config = load_config(config_path);
        if (seed) config.seed = seed;
        config.resolution_check = config.resolution_check || resolution_check;
        config.validate(command);
    } catch (const Error& e) {
        o.status = kExitUsage;
        o.message = e.what();
        return o;
    }

    StabilityReport rep;
    try {
        rep = run(config, command);
    } catch (const Error& e) {
        o.status = kExitAssertion;
        o.message = std::string("computation failed: ") + e.what();
        return o;
    }
    const std::string report_text = serialize_report(rep);
    const std::string csv_text = csv_table(rep);

    fs::create_directories(out_dir);
    for (const auto& [suffix, text] : {std::pair{".report", &report_text}, std::pair{".csv", &csv_text}}) {
        const fs::path path = fs::path(out_dir) / (rep.run_id + suffix);
        std::ofstream f(path, std::ios::binary);
        f << *text;
        if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
        o.written.push_back(path.string());
    }
    if (const Inequality* fail = rep.first_failure()) {
        o.status = kExitAssertion;
        o.message = "failed: " + fail->name + " (lhs " + g12(fail->lhs) + ", rhs " + g12(fail->rhs) +
                    ", tolerance " + g12(fail->tolerance) + ")";
    }
    return o;
}

}  // namespace rcdlab::cli
