#include "metsim/fatigue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace metsim {

namespace {

constexpr double kBisectTol = 1e-9;  // minutes

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw invalid_input(std::string(what) + " must be finite");
    }
}

// Load integral over [t0, t1] of a piecewise-constant profile, exact.
double piecewise_load_integral(const load_profile& profile, double t0, double t1) {
    const auto& pts = profile.points();
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double seg_start = std::max(pts[i].time, t0);
        const double seg_end = std::min((i + 1 < pts.size()) ? pts[i + 1].time : t1, t1);
        if (seg_end > seg_start) acc += pts[i].load * (seg_end - seg_start);
    }
    return acc;
}

// One classical RK4 step of dF/dt = -k/MVC * load(t) * F.
double rk4_step(const load_profile& profile, const fatigue_params& params, double t, double f,
                double h) {
    const double c = -params.k / params.mvc;
    const auto deriv = [&](double time, double value) { return c * profile.load_at(time) * value; };
    const double k1 = deriv(t, f);
    const double k2 = deriv(t + h / 2, f + h / 2 * k1);
    const double k3 = deriv(t + h / 2, f + h / 2 * k2);
    const double k4 = deriv(t + h, f + h * k3);
    return f + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Integrates from (t0, f0) to t1 with steps that never exceed rk_step and
// land exactly on t1.
double rk4_integrate(const load_profile& profile, const fatigue_params& params, double t0,
                     double f0, double t1, double rk_step) {
    double f = f0;
    const double span = t1 - t0;
    if (span <= 0.0) return f;
    const auto n = static_cast<std::size_t>(std::ceil(span / rk_step - 1e-12));
    const double h = span / static_cast<double>(std::max<std::size_t>(n, 1));
    double t = t0;
    for (std::size_t i = 0; i + 1 < std::max<std::size_t>(n, 1); ++i) {
        f = rk4_step(profile, params, t, f, h);
        t += h;
    }
    return rk4_step(profile, params, t, f, t1 - t);
}

}  // namespace

void fatigue_params::validate() const {
    check_finite(mvc, "mvc");
    check_finite(k, "k");
    if (mvc <= 0.0) throw invalid_input("mvc must be > 0");
    if (k <= 0.0) throw invalid_input("k must be > 0");
}

load_profile::load_profile(profile_mode mode, std::vector<profile_point> points, double duration)
    : mode_(mode), points_(std::move(points)), duration_(duration) {
    if (points_.empty()) throw invalid_input("load profile must have at least one point");
    if (points_.front().time != 0.0) throw invalid_input("load profile must start at t = 0");
    double prev = -1.0;
    for (const auto& p : points_) {
        check_finite(p.time, "profile time");
        check_finite(p.load, "profile load");
        if (p.load < 0.0) throw invalid_input("profile loads must be >= 0");
        if (p.time <= prev) throw invalid_input("profile times must be strictly increasing");
        prev = p.time;
    }
    check_finite(duration_, "profile duration");
    if (duration_ < points_.back().time) {
        throw invalid_input("profile duration must cover the last point");
    }
    if (duration_ <= 0.0) throw invalid_input("profile duration must be > 0");
}

load_profile load_profile::piecewise(std::vector<profile_point> points, double duration) {
    return load_profile(profile_mode::piecewise_constant, std::move(points), duration);
}

load_profile load_profile::sampled(std::vector<profile_point> points,
                                   std::optional<double> duration) {
    const double d = duration.value_or(points.empty() ? 0.0 : points.back().time);
    return load_profile(profile_mode::sampled_linear, std::move(points), d);
}

double load_profile::load_at(double t) const {
    if (!std::isfinite(t) || t < 0.0 || t > duration_) {
        throw invalid_input("time outside profile [0, duration]");
    }
    // last point with time <= t
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const profile_point& p) { return v < p.time; });
    const auto idx = static_cast<std::size_t>(it - points_.begin()) - 1;
    const profile_point& lo = points_[idx];
    if (mode_ == profile_mode::piecewise_constant || idx + 1 == points_.size()) {
        return lo.load;
    }
    const profile_point& hi = points_[idx + 1];
    const double w = (t - lo.time) / (hi.time - lo.time);
    return lo.load + w * (hi.load - lo.load);
}

double fcem_static(double t, double f_load, const fatigue_params& params) {
    params.validate();
    check_finite(t, "t");
    check_finite(f_load, "f_load");
    if (t < 0.0) throw invalid_input("t must be >= 0");
    if (f_load < 0.0) throw invalid_input("f_load must be >= 0");
    return params.mvc * std::exp(-params.k * f_load * t / params.mvc);
}

double capacity_at(const load_profile& profile, const fatigue_params& params, double t,
                   double rk_step) {
    params.validate();
    if (rk_step <= 0.0) throw invalid_input("rk_step must be > 0");
    if (!std::isfinite(t) || t < 0.0 || t > profile.duration()) {
        throw invalid_input("time outside profile [0, duration]");
    }
    if (profile.mode() == profile_mode::piecewise_constant) {
        return params.mvc *
               std::exp(-params.k / params.mvc * piecewise_load_integral(profile, 0.0, t));
    }
    // Integrate breakpoint to breakpoint so the load stays smooth within
    // each RK4 step.
    double time = 0.0;
    double f = params.mvc;
    for (const auto& p : profile.points()) {
        if (p.time <= 0.0) continue;
        if (p.time >= t) break;
        f = rk4_integrate(profile, params, time, f, p.time, rk_step);
        time = p.time;
    }
    return rk4_integrate(profile, params, time, f, t, rk_step);
}

capacity_trajectory simulate_capacity(const load_profile& profile, const fatigue_params& params,
                                      double step) {
    params.validate();
    check_finite(step, "step");
    if (step <= 0.0) throw invalid_input("step must be > 0");

    // Sample times: multiples of step plus all profile breakpoints.
    std::vector<double> times;
    const double duration = profile.duration();
    const auto n_steps = static_cast<std::size_t>(std::floor(duration / step + 1e-9));
    times.reserve(n_steps + profile.points().size() + 2);
    for (std::size_t i = 0; i <= n_steps; ++i) times.push_back(static_cast<double>(i) * step);
    for (const auto& p : profile.points()) {
        if (p.time <= duration) times.push_back(p.time);
    }
    times.push_back(duration);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                times.end());

    capacity_trajectory traj;
    traj.params = params;
    traj.samples.reserve(times.size());

    if (profile.mode() == profile_mode::piecewise_constant) {
        // Exact exponent accumulation segment by segment.
        double exponent = 0.0;
        double prev_t = 0.0;
        for (double t : times) {
            exponent += -params.k / params.mvc * piecewise_load_integral(profile, prev_t, t);
            traj.samples.push_back({t, params.mvc * std::exp(exponent)});
            prev_t = t;
        }
    } else {
        double f = params.mvc;
        double prev_t = 0.0;
        for (double t : times) {
            f = rk4_integrate(profile, params, prev_t, f, t, std::min(step, 1e-3));
            traj.samples.push_back({t, f});
            prev_t = t;
        }
    }
    return traj;
}

double met_extended(double f_mvc, double k) {
    check_finite(f_mvc, "f_mvc");
    check_finite(k, "k");
    if (k <= 0.0) throw invalid_input("k must be > 0");
    if (f_mvc <= 0.0) throw invalid_input("f_mvc must be > 0 (MET diverges at 0)");
    if (f_mvc > 1.0) throw invalid_input("f_mvc must be <= 1 (load exceeds capacity)");
    if (f_mvc == 1.0) return 0.0;
    return -std::log(f_mvc) / (k * f_mvc);
}

std::optional<double> endurance_time(const load_profile& profile, const fatigue_params& params) {
    params.validate();
    const double initial_load = profile.load_at(0.0);
    if (initial_load > params.mvc) throw infeasible_load(initial_load, params.mvc);

    const double duration = profile.duration();
    const auto gap = [&](double t) { return capacity_at(profile, params, t) - profile.load_at(t); };

    if (gap(0.0) <= 0.0) return 0.0;  // load equals capacity from the start

    // Bracket on a mesh of profile breakpoints plus a uniform scan; the
    // piecewise-constant load can jump at breakpoints, so every breakpoint
    // is a mesh node.
    std::vector<double> mesh;
    mesh.reserve(1024 + profile.points().size() + 1);
    for (std::size_t i = 1; i <= 1024; ++i) {
        mesh.push_back(duration * static_cast<double>(i) / 1024.0);
    }
    for (const auto& p : profile.points()) {
        if (p.time > 0.0 && p.time <= duration) mesh.push_back(p.time);
    }
    std::sort(mesh.begin(), mesh.end());
    mesh.erase(std::unique(mesh.begin(), mesh.end()), mesh.end());

    double lo = 0.0;
    for (double t : mesh) {
        if (t <= lo) continue;
        if (gap(t) <= 0.0) {
            // Bisect in (lo, t]; capacity is continuous and decreasing and
            // the load is constant or linear between mesh nodes.
            double hi = t;
            while (hi - lo > kBisectTol) {
                const double mid = 0.5 * (lo + hi);
                if (gap(mid) <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi;
        }
        lo = t;
    }
    return std::nullopt;
}

}  // namespace metsim
