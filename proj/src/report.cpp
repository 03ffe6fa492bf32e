#include "metsim/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace metsim {

namespace {

using nlohmann::json;

// Shortest round-trip decimal form; deterministic.
std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::optional<double> opt_number(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) {
        throw schema_error(std::string("field '") + key + "' must be a number or null");
    }
    return j.at(key).get<double>();
}

std::vector<std::string> opt_notes(const json& j) {
    std::vector<std::string> notes;
    if (j.contains("notes")) {
        for (const auto& n : j.at("notes")) notes.push_back(n.get<std::string>());
    }
    return notes;
}

cell_check make_cell(double computed, std::optional<double> golden,
                     std::optional<double> tolerance) {
    cell_check c;
    c.computed = computed;
    c.golden = golden;
    if (golden) {
        c.residual = computed - *golden;
        if (tolerance) c.pass = std::abs(*c.residual) <= *tolerance;
    }
    return c;
}

}  // namespace

const golden_row* golden_data::find(std::string_view id) const {
    for (const auto& r : rows) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

const golden_group* golden_data::find(muscle_group g) const {
    for (const auto& gr : groups) {
        if (gr.group == g) return &gr;
    }
    return nullptr;
}

golden_data parse_golden(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw schema_error(std::string("golden data is not valid JSON: ") + e.what());
    }
    golden_data out;
    out.version = doc.value("version", std::string{});
    if (!doc.contains("rows") || !doc["rows"].is_array()) {
        throw schema_error("golden data must have a 'rows' array");
    }
    for (const auto& jr : doc["rows"]) {
        golden_row row;
        row.id = jr.at("id").get<std::string>();
        row.r = opt_number(jr, "r");
        row.icc1 = opt_number(jr, "icc1");
        row.icc2 = opt_number(jr, "icc2");
        row.m = opt_number(jr, "m");
        row.notes = opt_notes(jr);
        out.rows.push_back(std::move(row));
    }
    if (doc.contains("groups")) {
        for (const auto& jg : doc["groups"]) {
            golden_group g;
            g.group = muscle_group_from_string(jg.at("group").get<std::string>());
            g.mean_m = opt_number(jg, "mean_m");
            g.std_m = opt_number(jg, "std_m");
            g.notes = opt_notes(jg);
            out.groups.push_back(std::move(g));
        }
    }
    return out;
}

golden_data load_golden(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open golden file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_golden(buf.str());
}

bool report_row::ok() const {
    if (!error.empty()) return false;
    return !m.failed() && !r.failed() && !icc2.failed();
}

bool group_summary::ok() const {
    if (mean_m.failed()) return false;
    return !(std_m && std_m->failed());
}

bool validation_report::all_pass() const {
    for (const auto& row : rows) {
        if (!row.ok()) return false;
    }
    for (const auto& g : groups) {
        if (!g.ok()) return false;
    }
    return true;
}

std::vector<std::string> validation_report::failing_rows() const {
    std::vector<std::string> out;
    for (const auto& row : rows) {
        if (!row.ok()) out.push_back(row.id);
    }
    return out;
}

validation_report build_validation_report(const model_catalog& catalog, const golden_data& golden,
                                          const evaluation_grid& grid, icc_variant variant,
                                          const tolerance_config& tolerances) {
    validation_report report;
    report.variant = variant;
    report.tolerances = tolerances;

    std::vector<regression_result> results;
    for (const auto& model : catalog.models()) {
        report_row row;
        row.id = model.id;
        row.label = model.label;
        row.group = model.group;
        const golden_row* g = golden.find(model.id);
        if (g) row.notes = g->notes;
        try {
            const regression_result res = analyze_model(model, grid, variant);
            results.push_back(res);
            row.m = make_cell(res.m, g ? g->m : std::nullopt, tolerances.m);
            row.r = make_cell(res.pearson, g ? g->r : std::nullopt, tolerances.r);
            row.icc1 = make_cell(res.icc_before, g ? g->icc1 : std::nullopt, std::nullopt);
            row.icc2 = make_cell(res.icc_after, g ? g->icc2 : std::nullopt, tolerances.icc2);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }

    for (const auto& stats : group_stats(results)) {
        group_summary summary;
        summary.group = stats.group;
        summary.member_count = stats.member_ms.size();
        summary.excluded = stats.excluded;
        const golden_group* g = golden.find(stats.group);
        if (g) summary.notes = g->notes;
        summary.mean_m =
            make_cell(stats.mean_m, g ? g->mean_m : std::nullopt, tolerances.group_mean);
        if (stats.std_m) {
            summary.std_m =
                make_cell(*stats.std_m, g ? g->std_m : std::nullopt, tolerances.group_std);
        }
        report.groups.push_back(std::move(summary));
    }
    return report;
}

figure_kind figure_kind_from_string(std::string_view s) {
    if (s == "icc" || s == "icc_diagram") return figure_kind::icc_diagram;
    if (s == "normplot" || s == "norm_plot") return figure_kind::norm_plot;
    if (s == "band" || s == "band_plot") return figure_kind::band_plot;
    throw invalid_input("unknown figure kind '" + std::string(s) + "'");
}

std::string_view to_string(figure_kind k) {
    switch (k) {
        case figure_kind::icc_diagram: return "icc_diagram";
        case figure_kind::norm_plot: return "norm_plot";
        case figure_kind::band_plot: return "band_plot";
    }
    return "?";
}

figure_data export_figure_data(figure_kind kind, muscle_group group, const model_catalog& catalog,
                               const evaluation_grid& grid, icc_variant variant,
                               const exclusion_rule& rule) {
    const auto members = catalog.by_group(group);
    if (members.empty()) {
        throw invalid_input("no catalog models in group '" + std::string(to_string(group)) + "'");
    }
    const auto xs = grid.points();
    figure_data data;

    switch (kind) {
        case figure_kind::icc_diagram: {
            data.columns = {"f_mvc", "extended_met", "reference"};
            std::vector<double> ms;
            for (const auto* m : members) {
                data.columns.push_back(m->id);
                ms.push_back(regress_m(*m, grid));
            }
            for (double x : xs) {
                const double p = extended_met_reference(x);
                std::vector<double> row = {x, p, p};
                for (std::size_t i = 0; i < members.size(); ++i) {
                    row.push_back(evaluate(*members[i], x) / ms[i]);
                }
                data.rows.push_back(std::move(row));
            }
            return data;
        }
        case figure_kind::norm_plot: {
            // Plotting positions over the group's fitted m values, with the
            // same exclusion rule as the group statistics.
            std::vector<double> ms;
            for (const auto* m : members) {
                const regression_result res = analyze_model(*m, grid, variant);
                if (res.icc_after >= rule.min_icc_after) ms.push_back(res.m);
            }
            if (ms.size() < 3) {
                throw invalid_input("normal plot needs at least 3 members; group '" +
                                    std::string(to_string(group)) + "' has " +
                                    std::to_string(ms.size()));
            }
            data.columns = {"m", "normal_quantile"};
            for (const auto& [value, quantile] : normal_plot_positions(ms)) {
                data.rows.push_back({value, quantile});
            }
            return data;
        }
        case figure_kind::band_plot: {
            const auto results = analyze_catalog(catalog, grid, variant);
            const auto stats = group_stats(results, rule);
            const auto it = std::find_if(stats.begin(), stats.end(),
                                         [&](const auto& s) { return s.group == group; });
            if (it == stats.end()) {
                throw invalid_input("no statistics for group '" +
                                    std::string(to_string(group)) + "'");
            }
            const prediction_band band = make_prediction_band(*it, grid);
            data.columns = {"f_mvc", "lower", "center", "upper"};
            for (const auto* m : members) data.columns.push_back(m->id);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const auto& s = band.samples[i];
                std::vector<double> row = {s.f_mvc, s.lower, s.center, s.upper};
                for (const auto* m : members) row.push_back(evaluate(*m, xs[i]));
                data.rows.push_back(std::move(row));
            }
            return data;
        }
    }
    throw invalid_input("unreachable figure kind");
}

std::string to_delimited(const figure_data& data) {
    std::ostringstream out;
    for (std::size_t i = 0; i < data.columns.size(); ++i) {
        if (i) out << ',';
        out << data.columns[i];
    }
    out << '\n';
    for (const auto& row : data.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << fmt(row[i]);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::string cell_fields(const cell_check& c) {
    std::string s = fmt(c.computed);
    s += ',';
    s += c.golden ? fmt(*c.golden) : "";
    s += ',';
    s += c.residual ? fmt(*c.residual) : "";
    s += ',';
    if (c.pass) s += *c.pass ? "pass" : "fail";
    return s;
}

json cell_json(const cell_check& c) {
    json j;
    j["computed"] = c.computed;
    j["golden"] = c.golden ? json(*c.golden) : json(nullptr);
    j["residual"] = c.residual ? json(*c.residual) : json(nullptr);
    j["pass"] = c.pass ? json(*c.pass) : json(nullptr);
    return j;
}

}  // namespace

std::string rows_to_delimited(const validation_report& report) {
    std::ostringstream out;
    out << "id,group,m,golden_m,dm,m_verdict,r,golden_r,dr,r_verdict,"
           "icc1,golden_icc1,dicc1,icc2,golden_icc2,dicc2,icc2_verdict,error\n";
    for (const auto& row : report.rows) {
        out << row.id << ',' << to_string(row.group) << ',';
        out << cell_fields(row.m) << ',';
        out << cell_fields(row.r) << ',';
        // icc1 carries no verdict
        out << fmt(row.icc1.computed) << ',' << (row.icc1.golden ? fmt(*row.icc1.golden) : "")
            << ',' << (row.icc1.residual ? fmt(*row.icc1.residual) : "") << ',';
        out << cell_fields(row.icc2) << ',';
        out << row.error << '\n';
    }
    return out.str();
}

std::string groups_to_delimited(const validation_report& report) {
    std::ostringstream out;
    out << "group,members,mean_m,golden_mean_m,dmean,mean_verdict,"
           "std_m,golden_std_m,dstd,std_verdict,excluded\n";
    for (const auto& g : report.groups) {
        out << to_string(g.group) << ',' << g.member_count << ',';
        out << cell_fields(g.mean_m) << ',';
        if (g.std_m) {
            out << cell_fields(*g.std_m);
        } else {
            out << ",,,";
        }
        out << ',';
        for (std::size_t i = 0; i < g.excluded.size(); ++i) {
            if (i) out << ';';
            out << g.excluded[i];
        }
        out << '\n';
    }
    return out.str();
}

std::string report_to_json(const validation_report& report) {
    json doc;
    doc["icc_variant"] = std::string(to_string(report.variant));
    doc["tolerances"] = {{"m", report.tolerances.m},
                         {"r", report.tolerances.r},
                         {"icc2", report.tolerances.icc2},
                         {"group_mean", report.tolerances.group_mean},
                         {"group_std", report.tolerances.group_std}};
    doc["all_pass"] = report.all_pass();
    doc["rows"] = json::array();
    for (const auto& row : report.rows) {
        json jr;
        jr["id"] = row.id;
        jr["label"] = row.label;
        jr["group"] = std::string(to_string(row.group));
        jr["m"] = cell_json(row.m);
        jr["r"] = cell_json(row.r);
        jr["icc1"] = cell_json(row.icc1);
        jr["icc2"] = cell_json(row.icc2);
        if (!row.notes.empty()) jr["notes"] = row.notes;
        if (!row.error.empty()) jr["error"] = row.error;
        doc["rows"].push_back(std::move(jr));
    }
    doc["groups"] = json::array();
    for (const auto& g : report.groups) {
        json jg;
        jg["group"] = std::string(to_string(g.group));
        jg["members"] = g.member_count;
        jg["mean_m"] = cell_json(g.mean_m);
        jg["std_m"] = g.std_m ? cell_json(*g.std_m) : json(nullptr);
        jg["excluded"] = g.excluded;
        if (!g.notes.empty()) jg["notes"] = g.notes;
        doc["groups"].push_back(std::move(jg));
    }
    return doc.dump(2) + "\n";
}

}  // namespace metsim
