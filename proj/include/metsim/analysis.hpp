#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metsim/catalog.hpp"

namespace metsim {

/// Uniform f_MVC grid start, start+step, ..., end. The default grid
/// (0.16 to 0.99, step 0.01) has exactly 84 points.
struct evaluation_grid {
    double start = 0.16;
    double end = 0.99;
    double step = 0.01;

    std::size_t size() const;
    std::vector<double> points() const;

    /// Throws invalid_input unless 0 < start <= end <= 1, step > 0 and
    /// (end - start) is an integral number of steps.
    void validate() const;
};

/// Reference curve of the extended MET model with k = 1: p(x) = -ln(x)/x.
double extended_met_reference(double x);

/// Least-squares scale factor of f onto p over the grid, through the
/// origin: m = sum(p_i * f_i) / sum(p_i^2). Always > 0 for a positive
/// model curve.
double regress_m(const met_model& model, const evaluation_grid& grid);

/// Series form of the same projection, for curves not in the catalog.
double regress_m(std::span<const double> reference, std::span<const double> series);

/// Same contract as regress_m, minimizing sum((f_i - m p_i)^2) directly
/// by golden-section search. Exists solely as the brute-force oracle for
/// the closed form; shares no code path with regress_m.
double regress_m_oracle(const met_model& model, const evaluation_grid& grid);

/// Series form of the oracle.
double regress_m_oracle(std::span<const double> reference, std::span<const double> series);

/// Product-moment correlation of two equal-length series (n >= 3, finite,
/// both with nonzero variance).
double pearson_r(std::span<const double> a, std::span<const double> b);

/// Correlation of the element-wise natural logs (values must be > 0);
/// the log-log sensitivity companion to pearson_r.
double pearson_r_log(std::span<const double> a, std::span<const double> b);

enum class icc_variant { one_way, two_way_agreement, two_way_consistency };

std::string_view to_string(icc_variant v);
icc_variant icc_variant_from_string(std::string_view s);

/// Single-rater intraclass correlation of the two-column table whose rows
/// pair a[i] with b[i]. one_way: (MSB - MSW) / (MSB + MSW) for two
/// raters; the two_way variants split out the rater effect. Degenerate
/// all-equal input is reported, not silently 1.
double icc(std::span<const double> a, std::span<const double> b,
           icc_variant variant = icc_variant::one_way);

/// Regression and agreement statistics for one empirical model:
/// icc_before compares the k = 1 extended model p(x) with f(x),
/// icc_after compares p(x) with f(x)/m.
struct regression_result {
    std::string model_id;
    muscle_group group = muscle_group::general;
    double m = 0.0;
    double pearson = 0.0;
    double icc_before = 0.0;
    double icc_after = 0.0;
};

regression_result analyze_model(const met_model& model, const evaluation_grid& grid,
                                icc_variant variant = icc_variant::one_way);

std::vector<regression_result> analyze_catalog(const model_catalog& catalog,
                                               const evaluation_grid& grid,
                                               icc_variant variant = icc_variant::one_way);

/// Members with icc_after below the threshold are excluded from group
/// statistics. The default 0.5 excludes exactly one catalog model
/// (monod_scherrer, icc_after 0.4736).
struct exclusion_rule {
    double min_icc_after = 0.5;
};

/// Per-group fatigue resistance statistics over non-excluded members.
/// std_m uses the sample (n-1) convention and is absent for groups with
/// a single member.
struct group_statistics {
    muscle_group group = muscle_group::general;
    std::vector<std::pair<std::string, double>> member_ms;  // (model id, m), non-excluded
    double mean_m = 0.0;
    std::optional<double> std_m;
    std::vector<std::string> excluded;
};

std::vector<group_statistics> group_stats(std::span<const regression_result> results,
                                          const exclusion_rule& rule = {});

/// Inverse standard normal CDF (Wichura's algorithm), full double
/// precision over (0, 1).
double normal_quantile(double p);

/// Normal-probability plotting positions: (m_(i), Phi^-1((i - 0.5)/n))
/// over the sorted values, i = 1..n, n >= 3.
std::vector<std::pair<double, double>> normal_plot_positions(std::span<const double> ms);

/// Population prediction band of a muscle group: the extended MET curve
/// scaled by mean_m and mean_m +/- std_m. k values are the reciprocals.
struct prediction_band {
    struct band_sample {
        double f_mvc = 0.0;
        double lower = 0.0;   // (mean - std) * p(x), minutes
        double center = 0.0;  // mean * p(x)
        double upper = 0.0;   // (mean + std) * p(x)
    };

    muscle_group group = muscle_group::general;
    double center_k = 0.0;  // 1 / mean
    double lower_k = 0.0;   // 1 / (mean + std)
    double upper_k = 0.0;   // 1 / (mean - std)
    std::vector<band_sample> samples;
};

/// Throws invalid_input when mean_m - std_m <= 0 (lower curve would not
/// be a valid MET curve). A group without std_m gets a zero-width band.
prediction_band make_prediction_band(const group_statistics& stats, const evaluation_grid& grid);

}  // namespace metsim
