#include "metsim/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metsim/analysis.hpp"
#include "metsim/catalog.hpp"
#include "metsim/fatigue.hpp"
#include "metsim/report.hpp"

namespace metsim::cli {

namespace {

namespace fs = std::filesystem;

struct cli_config {
    std::string catalog_path;
    std::string golden_path;
    evaluation_grid grid{};
    std::string icc_variant_name = "one_way";
    tolerance_config tolerances{};
    double min_icc = 0.5;
    std::string output_dir = ".";
    std::string output_format = "delimited";  // delimited | structured
};

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : fallback;
}

// Numeric output uses 6 significant digits on the console; file exports
// keep full precision.
std::string sig6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

void apply_config_file(const std::string& path, cli_config& cfg) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw invalid_input("config file is not valid JSON: " + std::string(e.what()));
    }
    if (doc.contains("catalog")) cfg.catalog_path = doc["catalog"].get<std::string>();
    if (doc.contains("golden")) cfg.golden_path = doc["golden"].get<std::string>();
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        if (g.contains("start")) cfg.grid.start = g["start"].get<double>();
        if (g.contains("end")) cfg.grid.end = g["end"].get<double>();
        if (g.contains("step")) cfg.grid.step = g["step"].get<double>();
    }
    if (doc.contains("icc_variant")) cfg.icc_variant_name = doc["icc_variant"].get<std::string>();
    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        if (t.contains("m")) cfg.tolerances.m = t["m"].get<double>();
        if (t.contains("r")) cfg.tolerances.r = t["r"].get<double>();
        if (t.contains("icc2")) cfg.tolerances.icc2 = t["icc2"].get<double>();
        if (t.contains("group_mean")) cfg.tolerances.group_mean = t["group_mean"].get<double>();
        if (t.contains("group_std")) cfg.tolerances.group_std = t["group_std"].get<double>();
    }
    if (doc.contains("min_icc")) cfg.min_icc = doc["min_icc"].get<double>();
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("output_format")) cfg.output_format = doc["output_format"].get<std::string>();
}

load_profile read_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("cannot open profile file '" + path + "'");
    std::string mode = "piecewise";
    std::optional<double> duration;
    std::vector<profile_point> points;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            std::string header = line.substr(first + 1);
            const auto colon = header.find(':');
            if (colon == std::string::npos) continue;  // plain comment
            std::string key = header.substr(0, colon);
            std::string value = header.substr(colon + 1);
            const auto trim = [](std::string& s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                s = (b == std::string::npos) ? std::string{} : s.substr(b, e - b + 1);
            };
            trim(key);
            trim(value);
            if (key == "mode") {
                mode = value;
            } else if (key == "duration") {
                try {
                    duration = std::stod(value);
                } catch (const std::exception&) {
                    throw invalid_input("profile line " + std::to_string(lineno) +
                                        ": bad duration '" + value + "'");
                }
            }
            continue;
        }
        std::string row = line;
        std::replace(row.begin(), row.end(), ',', ' ');
        std::istringstream is(row);
        double t = 0.0, load = 0.0;
        if (!(is >> t >> load)) {
            throw invalid_input("profile line " + std::to_string(lineno) +
                                ": expected 'time_min load_N'");
        }
        points.push_back({t, load});
    }
    if (points.empty()) throw invalid_input("profile file has no data rows");
    if (mode == "piecewise") {
        if (!duration) {
            throw invalid_input("piecewise profile needs a '#duration: <min>' header");
        }
        return load_profile::piecewise(std::move(points), *duration);
    }
    if (mode == "sampled") {
        return load_profile::sampled(std::move(points), duration);
    }
    throw invalid_input("profile '#mode:' must be 'piecewise' or 'sampled', got '" + mode + "'");
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw invalid_input("cannot write '" + path.string() + "'");
    out << text;
}

group_statistics require_group_stats(const cli_config& cfg, muscle_group group) {
    const model_catalog catalog = load_catalog(cfg.catalog_path);
    const auto results =
        analyze_catalog(catalog, cfg.grid, icc_variant_from_string(cfg.icc_variant_name));
    for (auto& s : group_stats(results, exclusion_rule{cfg.min_icc})) {
        if (s.group == group) return s;
    }
    throw invalid_input("no models in group '" + std::string(to_string(group)) + "'");
}

int cmd_predict(const cli_config& cfg, double f_mvc, std::optional<double> k,
                const std::string& group_name, std::ostream& out) {
    if (k) {
        out << "MET: " << sig6(met_extended(f_mvc, *k)) << " min\n";
        return exit_ok;
    }
    const muscle_group group = muscle_group_from_string(group_name);
    const group_statistics stats = require_group_stats(cfg, group);
    const double p = met_extended(f_mvc, 1.0);
    const double sd = stats.std_m.value_or(0.0);
    out << "group: " << to_string(group) << " (mean m = " << sig6(stats.mean_m);
    if (stats.std_m) {
        out << ", std = " << sig6(*stats.std_m);
    } else {
        out << ", std undefined (single member)";
    }
    out << ")\n";
    out << "MET center: " << sig6(stats.mean_m * p) << " min (k = " << sig6(1.0 / stats.mean_m)
        << ")\n";
    out << "MET band:   [" << sig6((stats.mean_m - sd) * p) << ", "
        << sig6((stats.mean_m + sd) * p) << "] min\n";
    return exit_ok;
}

int cmd_simulate(const cli_config& cfg, const std::string& profile_path, double mvc, double k,
                 double step, std::string out_path, std::ostream& out) {
    const load_profile profile = read_profile_file(profile_path);
    const fatigue_params params{mvc, k};
    // resolve endurance first so an infeasible profile fails before any
    // output file is written
    const auto crossing = endurance_time(profile, params);
    const capacity_trajectory traj = simulate_capacity(profile, params, step);

    figure_data table;
    table.columns = {"time_min", "load_N", "f_cem_N"};
    for (const auto& s : traj.samples) {
        table.rows.push_back({s.time, profile.load_at(s.time), s.f_cem});
    }
    if (out_path.empty()) out_path = (fs::path(cfg.output_dir) / "trajectory.csv").string();
    write_text_file(out_path, to_delimited(table));
    out << "trajectory: " << out_path << " (" << traj.samples.size() << " samples)\n";
    if (crossing) {
        out << "endurance crossing at " << sig6(*crossing) << " min\n";
    } else {
        out << "endurance crossing not reached within " << sig6(profile.duration()) << " min\n";
    }
    return exit_ok;
}

int cmd_regress(const cli_config& cfg, const std::string& model_id, std::ostream& out) {
    const model_catalog catalog = load_catalog(cfg.catalog_path);
    const met_model* model = catalog.find(model_id);
    if (!model) throw invalid_input("unknown model id '" + model_id + "'");
    const regression_result res =
        analyze_model(*model, cfg.grid, icc_variant_from_string(cfg.icc_variant_name));
    out << "model: " << model->id << " (" << to_string(model->group) << ")\n";
    out << "m = " << sig6(res.m) << "  (k = " << sig6(1.0 / res.m) << ")\n";
    out << "r = " << sig6(res.pearson) << "  icc_before = " << sig6(res.icc_before)
        << "  icc_after = " << sig6(res.icc_after) << "\n";
    return exit_ok;
}

int cmd_validate(const cli_config& cfg, std::ostream& out) {
    const model_catalog catalog = load_catalog(cfg.catalog_path);
    const golden_data golden = load_golden(cfg.golden_path);
    const icc_variant variant = icc_variant_from_string(cfg.icc_variant_name);
    const validation_report report =
        build_validation_report(catalog, golden, cfg.grid, variant, cfg.tolerances);

    const fs::path dir(cfg.output_dir);
    if (cfg.output_format == "structured") {
        write_text_file(dir / "validation_report.json", report_to_json(report));
        out << "report: " << (dir / "validation_report.json").string() << "\n";
    } else {
        write_text_file(dir / "validation_rows.csv", rows_to_delimited(report));
        write_text_file(dir / "validation_groups.csv", groups_to_delimited(report));
        out << "report: " << (dir / "validation_rows.csv").string() << ", "
            << (dir / "validation_groups.csv").string() << "\n";
    }

    std::size_t ok_rows = 0;
    for (const auto& row : report.rows) {
        if (row.ok()) ++ok_rows;
    }
    out << "rows within tolerance: " << ok_rows << "/" << report.rows.size() << "\n";
    for (const auto& row : report.rows) {
        if (row.ok()) continue;
        out << "  " << row.id << ":";
        if (!row.error.empty()) {
            out << " error: " << row.error;
        } else {
            if (row.m.failed()) out << " dm=" << sig6(*row.m.residual);
            if (row.r.failed()) out << " dr=" << sig6(*row.r.residual);
            if (row.icc2.failed()) out << " dicc2=" << sig6(*row.icc2.residual);
        }
        out << "\n";
    }
    for (const auto& g : report.groups) {
        if (g.ok()) continue;
        out << "  group " << to_string(g.group) << ":";
        if (g.mean_m.failed()) out << " dmean=" << sig6(*g.mean_m.residual);
        if (g.std_m && g.std_m->failed()) out << " dstd=" << sig6(*g.std_m->residual);
        out << "\n";
    }
    for (const auto& g : report.groups) {
        for (const auto& ex : g.excluded) {
            out << "excluded from " << to_string(g.group) << " statistics: " << ex << "\n";
        }
    }
    out << "validation: " << (report.all_pass() ? "PASS" : "FAIL") << "\n";
    return report.all_pass() ? exit_ok : exit_validation_failed;
}

int cmd_export(const cli_config& cfg, const std::string& kind_name, const std::string& group_name,
               std::string out_path, std::ostream& out) {
    const figure_kind kind = figure_kind_from_string(kind_name);
    const muscle_group group = muscle_group_from_string(group_name);
    const model_catalog catalog = load_catalog(cfg.catalog_path);
    const figure_data data =
        export_figure_data(kind, group, catalog, cfg.grid,
                           icc_variant_from_string(cfg.icc_variant_name),
                           exclusion_rule{cfg.min_icc});
    if (out_path.empty()) {
        out_path = (fs::path(cfg.output_dir) /
                    (std::string(to_string(kind)) + "_" + std::string(to_string(group)) + ".csv"))
                       .string();
    }
    write_text_file(out_path, to_delimited(data));
    out << "export: " << out_path << " (" << data.columns.size() << " columns, "
        << data.rows.size() << " rows)\n";
    return exit_ok;
}

int cmd_stats(const cli_config& cfg, std::ostream& out) {
    const model_catalog catalog = load_catalog(cfg.catalog_path);
    const auto results =
        analyze_catalog(catalog, cfg.grid, icc_variant_from_string(cfg.icc_variant_name));
    const auto stats = group_stats(results, exclusion_rule{cfg.min_icc});
    out << "group,members,mean_m,std_m,excluded\n";
    for (const auto& g : stats) {
        out << to_string(g.group) << ',' << g.member_ms.size() << ',' << sig6(g.mean_m) << ',';
        if (g.std_m) out << sig6(*g.std_m);
        out << ',';
        for (std::size_t i = 0; i < g.excluded.size(); ++i) {
            if (i) out << ';';
            out << g.excluded[i];
        }
        out << '\n';
    }
    return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    cli_config cfg;
    cfg.catalog_path = env_or("METSIM_CATALOG", "data/met_catalog.json");
    cfg.golden_path = env_or("METSIM_GOLDEN", "data/met_golden.json");

    // Config file values sit between built-in/env defaults and flags, so
    // the file is applied before CLI11 sees the remaining arguments.
    try {
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config") {
                if (i + 1 >= args.size()) throw invalid_input("--config needs a file path");
                apply_config_file(args[i + 1], cfg);
            } else if (args[i].rfind("--config=", 0) == 0) {
                apply_config_file(args[i].substr(9), cfg);
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }

    CLI::App app{"Muscle fatigue and maximum endurance time toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags override it)");

    const auto add_common = [&cfg](CLI::App* sub, bool with_variant = true) {
        sub->fallthrough();  // let --config reach the top-level app
        sub->add_option("--catalog", cfg.catalog_path, "model catalog file");
        sub->add_option("--grid-start", cfg.grid.start, "f_MVC grid start");
        sub->add_option("--grid-end", cfg.grid.end, "f_MVC grid end");
        sub->add_option("--grid-step", cfg.grid.step, "f_MVC grid step");
        if (with_variant) {
            sub->add_option("--icc-variant", cfg.icc_variant_name,
                            "one_way | two_way_agreement | two_way_consistency");
            sub->add_option("--min-icc", cfg.min_icc,
                            "exclude models with icc_after below this from group statistics");
        }
    };

    // predict
    auto* predict = app.add_subcommand("predict", "MET of a constant relative load");
    double f_mvc = 0.0;
    predict->add_option("--fmvc", f_mvc, "relative load, 0 < f_mvc <= 1")->required();
    std::optional<double> k_opt;
    std::string group_name;
    predict->add_option("--k", k_opt, "fatigue ratio (1/min)");
    predict->add_option("--group", group_name, "muscle group (band from catalog statistics)");
    add_common(predict);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "capacity decay under a load profile");
    simulate->fallthrough();
    std::string profile_path;
    double mvc = 0.0;
    double sim_k = 1.0;
    double sim_step = 0.01;
    std::string sim_out;
    simulate->add_option("--profile", profile_path, "profile file (see README)")->required();
    simulate->add_option("--mvc", mvc, "maximum voluntary contraction (N)")->required();
    simulate->add_option("--k", sim_k, "fatigue ratio (1/min)");
    simulate->add_option("--step", sim_step, "trajectory sample step (min)");
    simulate->add_option("--out", sim_out, "trajectory output file");

    // regress
    auto* regress = app.add_subcommand("regress", "fatigue resistance of one catalog model");
    std::string model_id;
    regress->add_option("--model", model_id, "catalog model id")->required();
    add_common(regress);

    // validate
    auto* validate = app.add_subcommand("validate", "full pipeline vs reference values");
    validate->add_option("--golden", cfg.golden_path, "reference values file");
    validate->add_option("--out-dir", cfg.output_dir, "report output directory");
    validate->add_option("--format", cfg.output_format, "delimited | structured");
    validate->add_option("--tol-m", cfg.tolerances.m, "tolerance on m");
    validate->add_option("--tol-r", cfg.tolerances.r, "tolerance on r");
    validate->add_option("--tol-icc2", cfg.tolerances.icc2, "tolerance on icc2");
    validate->add_option("--tol-group-mean", cfg.tolerances.group_mean, "tolerance on group mean");
    validate->add_option("--tol-group-std", cfg.tolerances.group_std, "tolerance on group std");
    add_common(validate);

    // export
    auto* exp = app.add_subcommand("export", "figure data behind the analysis");
    std::string kind_name;
    std::string export_group;
    std::string export_out;
    exp->add_option("--kind", kind_name, "icc | normplot | band")->required();
    exp->add_option("--group", export_group, "muscle group")->required();
    exp->add_option("--out", export_out, "output file");
    exp->add_option("--out-dir", cfg.output_dir, "output directory");
    add_common(exp);

    // stats
    auto* stats = app.add_subcommand("stats", "per-group fatigue resistance statistics");
    add_common(stats);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (app.got_subcommand(predict)) {
            if (k_opt.has_value() == !group_name.empty()) {
                err << "error: give exactly one of --k or --group\n";
                return exit_usage;
            }
            return cmd_predict(cfg, f_mvc, k_opt, group_name, out);
        }
        if (app.got_subcommand(simulate)) {
            return cmd_simulate(cfg, profile_path, mvc, sim_k, sim_step, sim_out, out);
        }
        if (app.got_subcommand(regress)) return cmd_regress(cfg, model_id, out);
        if (app.got_subcommand(validate)) return cmd_validate(cfg, out);
        if (app.got_subcommand(exp)) return cmd_export(cfg, kind_name, export_group, export_out, out);
        if (app.got_subcommand(stats)) return cmd_stats(cfg, out);
        err << "error: no subcommand\n";
        return exit_usage;
    } catch (const infeasible_load& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_input_error;
    }
}

}  // namespace metsim::cli
