#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metsim/analysis.hpp"
#include "metsim/catalog.hpp"

namespace metsim {

/// Reference (golden) values for one catalog model. Any field may be
/// absent when the source does not publish it.
struct golden_row {
    std::string id;
    std::optional<double> r;
    std::optional<double> icc1;
    std::optional<double> icc2;
    std::optional<double> m;
    std::vector<std::string> notes;
};

struct golden_group {
    muscle_group group = muscle_group::general;
    std::optional<double> mean_m;
    std::optional<double> std_m;
    std::vector<std::string> notes;
};

struct golden_data {
    std::string version;
    std::vector<golden_row> rows;
    std::vector<golden_group> groups;

    const golden_row* find(std::string_view id) const;
    const golden_group* find(muscle_group g) const;
};

golden_data parse_golden(std::string_view text);
golden_data load_golden(const std::string& path);

/// Absolute tolerances for golden comparisons. icc1 has no gate (the
/// published ICC formula is not stated); it is reported with residuals
/// only.
struct tolerance_config {
    double m = 0.005;
    double r = 0.005;
    double icc2 = 0.05;
    double group_mean = 0.005;
    double group_std = 0.005;
};

/// One compared cell: pass is set only when a golden value and a gate
/// exist for the cell.
struct cell_check {
    double computed = 0.0;
    std::optional<double> golden;
    std::optional<double> residual;  // computed - golden
    std::optional<bool> pass;

    bool failed() const { return pass.has_value() && !*pass; }
};

struct report_row {
    std::string id;
    std::string label;
    muscle_group group = muscle_group::general;
    cell_check m;
    cell_check r;
    cell_check icc1;  // informational, never gated
    cell_check icc2;
    std::vector<std::string> notes;
    std::string error;  // non-empty when analysis failed for this model

    bool ok() const;
};

struct group_summary {
    muscle_group group = muscle_group::general;
    std::size_t member_count = 0;
    cell_check mean_m;
    std::optional<cell_check> std_m;  // absent for single-member groups
    std::vector<std::string> excluded;
    std::vector<std::string> notes;

    bool ok() const;
};

struct validation_report {
    std::vector<report_row> rows;
    std::vector<group_summary> groups;
    icc_variant variant = icc_variant::one_way;
    tolerance_config tolerances;

    bool all_pass() const;
    /// ids of rows with any failing cell, in catalog order.
    std::vector<std::string> failing_rows() const;
};

/// Runs the full pipeline (evaluate, regress, correlate, group stats)
/// over the catalog and compares against the golden data. Per-model
/// analysis errors are recorded in the row, not propagated.
validation_report build_validation_report(const model_catalog& catalog, const golden_data& golden,
                                          const evaluation_grid& grid,
                                          icc_variant variant = icc_variant::one_way,
                                          const tolerance_config& tolerances = {});

enum class figure_kind { icc_diagram, norm_plot, band_plot };

figure_kind figure_kind_from_string(std::string_view s);
std::string_view to_string(figure_kind k);

/// Tabular dataset behind one figure; first column is the x axis.
struct figure_data {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// icc_diagram: f_mvc, extended MET p(x), reference diagonal, one column
///   per model with f(x)/m (log-log agreement plot).
/// norm_plot: sorted member m values with standard-normal plotting
///   positions; rejected for groups with fewer than 3 members.
/// band_plot: f_mvc, lower/center/upper band curves, one column per
///   member with the raw empirical curve f(x).
figure_data export_figure_data(figure_kind kind, muscle_group group, const model_catalog& catalog,
                               const evaluation_grid& grid,
                               icc_variant variant = icc_variant::one_way,
                               const exclusion_rule& rule = {});

/// Delimited-text renderings (one-line header; stable column names; full
/// round-trip precision). Byte-identical for identical inputs.
std::string to_delimited(const figure_data& data);
std::string rows_to_delimited(const validation_report& report);
std::string groups_to_delimited(const validation_report& report);
std::string report_to_json(const validation_report& report);

}  // namespace metsim
