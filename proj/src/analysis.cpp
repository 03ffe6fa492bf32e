#include "metsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace metsim {

std::size_t evaluation_grid::size() const {
    return static_cast<std::size_t>(std::llround((end - start) / step)) + 1;
}

void evaluation_grid::validate() const {
    if (!std::isfinite(start) || !std::isfinite(end) || !std::isfinite(step)) {
        throw invalid_input("grid bounds must be finite");
    }
    if (start <= 0.0 || end > 1.0 || start > end) {
        throw invalid_input("grid must satisfy 0 < start <= end <= 1");
    }
    if (step <= 0.0) throw invalid_input("grid step must be > 0");
    const double n = (end - start) / step;
    if (std::abs(n - std::llround(n)) > 1e-6) {
        throw invalid_input("grid span must be an integral number of steps");
    }
}

std::vector<double> evaluation_grid::points() const {
    validate();
    const std::size_t n = size();
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = start + static_cast<double>(i) * step;
    return xs;
}

double extended_met_reference(double x) {
    if (!std::isfinite(x) || x <= 0.0 || x > 1.0) {
        throw invalid_input("reference curve needs 0 < x <= 1");
    }
    return -std::log(x) / x;
}

double regress_m(std::span<const double> reference, std::span<const double> series) {
    if (reference.size() != series.size()) throw invalid_input("series lengths differ");
    if (reference.empty()) throw invalid_input("empty series");
    double sum_pf = 0.0;
    double sum_pp = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        sum_pf += reference[i] * series[i];
        sum_pp += reference[i] * reference[i];
    }
    if (sum_pp == 0.0) throw invalid_input("degenerate grid: sum of squared reference is 0");
    return sum_pf / sum_pp;
}

double regress_m(const met_model& model, const evaluation_grid& grid) {
    const auto xs = grid.points();
    std::vector<double> p(xs.size()), f(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        p[i] = extended_met_reference(xs[i]);
        f[i] = evaluate(model, xs[i]);
    }
    return regress_m(p, f);
}

double regress_m_oracle(std::span<const double> reference, std::span<const double> series) {
    if (reference.size() != series.size()) throw invalid_input("series lengths differ");
    if (reference.empty()) throw invalid_input("empty series");
    std::vector<long double> ps(reference.begin(), reference.end());
    std::vector<long double> fs(series.begin(), series.end());
    const auto objective = [&](long double m) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const long double d = fs[i] - m * ps[i];
            acc += d * d;
        }
        return acc;
    };

    // Expand the bracket until the minimum is interior.
    long double lo = 0.0L;
    long double hi = 10.0L;
    while (objective(hi) < objective(hi * 0.999L) && hi < 1e9L) hi *= 2.0L;

    const long double inv_phi = 0.6180339887498948482L;
    long double a = lo, b = hi;
    long double c = b - inv_phi * (b - a);
    long double d = a + inv_phi * (b - a);
    long double fc = objective(c);
    long double fd = objective(d);
    while (b - a > 1e-10L * std::max<long double>(1.0L, b)) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    // The objective is an exact quadratic, so a single parabolic vertex
    // solve from three well-spaced samples removes the comparison-noise
    // plateau that pure interval shrinking bottoms out on.
    long double m0 = (a + b) / 2.0L;
    const long double delta = 1e-3L * std::max<long double>(1.0L, m0);
    const long double f_lo = objective(m0 - delta);
    const long double f_mid = objective(m0);
    const long double f_hi = objective(m0 + delta);
    const long double denom = f_lo - 2.0L * f_mid + f_hi;
    if (denom > 0.0L) m0 += delta * (f_lo - f_hi) / (2.0L * denom);
    return static_cast<double>(m0);
}

double regress_m_oracle(const met_model& model, const evaluation_grid& grid) {
    const auto xs = grid.points();
    std::vector<double> p(xs.size()), f(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        p[i] = extended_met_reference(xs[i]);
        f[i] = evaluate(model, xs[i]);
    }
    return regress_m_oracle(p, f);
}

namespace {

void check_series(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw invalid_input("series lengths differ");
    if (a.size() < 3) throw invalid_input("series need at least 3 points");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw invalid_input("series values must be finite");
        }
    }
}

double mean_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

}  // namespace

double pearson_r(std::span<const double> a, std::span<const double> b) {
    check_series(a, b);
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw invalid_input("pearson_r: zero variance in a series");
    return sab / std::sqrt(saa * sbb);
}

double pearson_r_log(std::span<const double> a, std::span<const double> b) {
    check_series(a, b);
    std::vector<double> la(a.size()), lb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= 0.0 || b[i] <= 0.0) {
            throw invalid_input("pearson_r_log needs strictly positive values");
        }
        la[i] = std::log(a[i]);
        lb[i] = std::log(b[i]);
    }
    return pearson_r(la, lb);
}

std::string_view to_string(icc_variant v) {
    switch (v) {
        case icc_variant::one_way: return "one_way";
        case icc_variant::two_way_agreement: return "two_way_agreement";
        case icc_variant::two_way_consistency: return "two_way_consistency";
    }
    return "?";
}

icc_variant icc_variant_from_string(std::string_view s) {
    if (s == "one_way" || s == "oneway") return icc_variant::one_way;
    if (s == "two_way_agreement" || s == "agreement") return icc_variant::two_way_agreement;
    if (s == "two_way_consistency" || s == "consistency") return icc_variant::two_way_consistency;
    throw invalid_input("unknown ICC variant '" + std::string(s) + "'");
}

double icc(std::span<const double> a, std::span<const double> b, icc_variant variant) {
    check_series(a, b);
    const auto n = static_cast<double>(a.size());
    constexpr double k = 2.0;  // raters

    double grand = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) grand += a[i] + b[i];
    grand /= n * k;

    double ss_rows = 0.0;   // between targets
    double ss_within = 0.0; // within targets
    double col_a = 0.0, col_b = 0.0;
    double ss_total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double rm = 0.5 * (a[i] + b[i]);
        ss_rows += (rm - grand) * (rm - grand);
        ss_within += (a[i] - rm) * (a[i] - rm) + (b[i] - rm) * (b[i] - rm);
        col_a += a[i];
        col_b += b[i];
        ss_total += (a[i] - grand) * (a[i] - grand) + (b[i] - grand) * (b[i] - grand);
    }
    ss_rows *= k;
    col_a /= n;
    col_b /= n;

    if (ss_total == 0.0) throw invalid_input("icc: degenerate all-equal input");

    const double msb = ss_rows / (n - 1.0);
    const double msw = ss_within / (n * (k - 1.0));

    if (variant == icc_variant::one_way) {
        const double denom = msb + (k - 1.0) * msw;
        if (denom == 0.0) throw invalid_input("icc: degenerate input (zero mean squares)");
        return (msb - msw) / denom;
    }

    const double ss_cols = n * ((col_a - grand) * (col_a - grand) + (col_b - grand) * (col_b - grand));
    const double ss_err = ss_total - ss_rows - ss_cols;
    const double msr = msb;
    const double msc = ss_cols / (k - 1.0);
    const double mse = ss_err / ((n - 1.0) * (k - 1.0));

    if (variant == icc_variant::two_way_consistency) {
        const double denom = msr + (k - 1.0) * mse;
        if (denom == 0.0) throw invalid_input("icc: degenerate input (zero mean squares)");
        return (msr - mse) / denom;
    }
    const double denom = msr + (k - 1.0) * mse + (k / n) * (msc - mse);
    if (denom == 0.0) throw invalid_input("icc: degenerate input (zero mean squares)");
    return (msr - mse) / denom;
}

regression_result analyze_model(const met_model& model, const evaluation_grid& grid,
                                icc_variant variant) {
    const auto xs = grid.points();
    std::vector<double> p(xs.size()), f(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        p[i] = extended_met_reference(xs[i]);
        f[i] = evaluate(model, xs[i]);
    }
    regression_result res;
    res.model_id = model.id;
    res.group = model.group;
    res.m = regress_m(p, f);
    res.pearson = pearson_r(p, f);
    res.icc_before = icc(p, f, variant);
    std::vector<double> scaled(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) scaled[i] = f[i] / res.m;
    res.icc_after = icc(p, scaled, variant);
    return res;
}

std::vector<regression_result> analyze_catalog(const model_catalog& catalog,
                                               const evaluation_grid& grid, icc_variant variant) {
    std::vector<regression_result> out;
    out.reserve(catalog.size());
    for (const auto& m : catalog.models()) {
        out.push_back(analyze_model(m, grid, variant));
    }
    return out;
}

std::vector<group_statistics> group_stats(std::span<const regression_result> results,
                                          const exclusion_rule& rule) {
    std::map<muscle_group, group_statistics> acc;
    for (const auto& r : results) {
        auto& g = acc[r.group];
        g.group = r.group;
        if (r.icc_after < rule.min_icc_after) {
            g.excluded.push_back(r.model_id);
        } else {
            g.member_ms.emplace_back(r.model_id, r.m);
        }
    }
    std::vector<group_statistics> out;
    for (auto& [group, g] : acc) {
        if (g.member_ms.empty()) {
            throw invalid_input("group '" + std::string(to_string(group)) +
                                "' has no members left after exclusion");
        }
        double sum = 0.0;
        for (const auto& [id, m] : g.member_ms) sum += m;
        g.mean_m = sum / static_cast<double>(g.member_ms.size());
        if (g.member_ms.size() > 1) {
            double ss = 0.0;
            for (const auto& [id, m] : g.member_ms) ss += (m - g.mean_m) * (m - g.mean_m);
            g.std_m = std::sqrt(ss / static_cast<double>(g.member_ms.size() - 1));
        }
        out.push_back(std::move(g));
    }
    return out;
}

namespace {

// Wichura's PPND16: rational approximations for the inverse standard
// normal CDF, accurate to full double precision.
double ppnd16(double p) {
    constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e2,
                             1.9715909503065514427e3, 1.3731693765509461125e4,
                             4.5921953931549871457e4, 6.7265770927008700853e4,
                             3.3430575583588128105e4, 2.5090809287301226727e3};
    constexpr double b[8] = {1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
                             5.3941960214247511077e3, 2.1213794301586595867e4,
                             3.9307895800092710610e4, 2.8729085735721942674e4,
                             5.2264952788528545610e3};
    constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                             5.76949722146069140550e0, 3.64784832476320460504e0,
                             1.27045825245236838258e0, 2.41780725177450611770e-1,
                             2.27238449892691845833e-2, 7.74545014278341407640e-4};
    constexpr double d[8] = {1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
                             6.89767334985100004550e-1, 1.48103976427480074590e-1,
                             1.51986665636164571966e-2, 5.47593808499534494600e-4,
                             1.05075007164441684324e-9};
    constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                             1.78482653991729133580e0, 2.96560571828504891230e-1,
                             2.65321895265761230930e-2, 1.24266094738807843860e-3,
                             2.71155556874348757815e-5, 2.01033439929228813265e-7};
    constexpr double f[8] = {1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                             1.48753612908506148525e-2, 7.86869131145613259100e-4,
                             1.84631831751005468180e-5, 1.42151175831644588870e-7,
                             2.04426310338993978564e-15};
    const auto ratio = [](const double (&num)[8], const double (&den)[8], double r) {
        double n = num[7], m = den[7];
        for (int i = 6; i >= 0; --i) {
            n = n * r + num[i];
            m = m * r + den[i];
        }
        return n / m;
    };

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * ratio(a, b, r);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        x = ratio(c, d, r - 1.6);
    } else {
        x = ratio(e, f, r - 5.0);
    }
    return (q < 0.0) ? -x : x;
}

}  // namespace

double normal_quantile(double p) {
    if (!std::isfinite(p) || p <= 0.0 || p >= 1.0) {
        throw invalid_input("normal_quantile needs p in (0, 1)");
    }
    return ppnd16(p);
}

std::vector<std::pair<double, double>> normal_plot_positions(std::span<const double> ms) {
    if (ms.size() < 3) throw invalid_input("normal plot needs at least 3 values");
    std::vector<double> sorted(ms.begin(), ms.end());
    for (double v : sorted) {
        if (!std::isfinite(v)) throw invalid_input("normal plot values must be finite");
    }
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<std::pair<double, double>> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double q = (static_cast<double>(i) + 0.5) / n;
        out.emplace_back(sorted[i], normal_quantile(q));
    }
    return out;
}

prediction_band make_prediction_band(const group_statistics& stats, const evaluation_grid& grid) {
    const double mean = stats.mean_m;
    const double sd = stats.std_m.value_or(0.0);
    if (mean <= 0.0) throw invalid_input("prediction band needs mean_m > 0");
    if (mean - sd <= 0.0) {
        throw invalid_input("prediction band undefined: mean_m - std_m <= 0 for group '" +
                            std::string(to_string(stats.group)) + "'");
    }
    prediction_band band;
    band.group = stats.group;
    band.center_k = 1.0 / mean;
    band.lower_k = 1.0 / (mean + sd);
    band.upper_k = 1.0 / (mean - sd);
    for (double x : grid.points()) {
        const double p = extended_met_reference(x);
        band.samples.push_back({x, (mean - sd) * p, mean * p, (mean + sd) * p});
    }
    return band;
}

}  // namespace metsim
