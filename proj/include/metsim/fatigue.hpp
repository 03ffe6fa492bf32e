#pragma once

#include <optional>
#include <vector>

#include "metsim/errors.hpp"

namespace metsim {

/// Parameters of the dynamic fatigue model
///
///   dF_cem/dt = -k * (F_cem(t) / MVC) * F_load(t)
///
/// MVC is the maximum voluntary contraction (initial capacity, newtons)
/// and k the fatigue ratio (1/min). The fatigue resistance m = 1/k.
struct fatigue_params {
    double mvc = 0.0;  ///< newtons, > 0
    double k = 1.0;    ///< 1/min, > 0

    double fatigue_resistance() const { return 1.0 / k; }

    /// Throws invalid_input unless mvc > 0, k > 0 and both are finite.
    void validate() const;
};

struct profile_point {
    double time = 0.0;  ///< minutes
    double load = 0.0;  ///< newtons
};

enum class profile_mode {
    piecewise_constant,  ///< load holds the segment value until the next point
    sampled_linear,      ///< load linearly interpolated between samples
};

/// Time-varying external load F_load(t) on [0, duration], minutes/newtons.
class load_profile {
public:
    /// Piecewise-constant profile. Points are (segment start, load); the
    /// first time must be 0, times strictly increasing, loads >= 0.
    /// `duration` must be >= the last segment start.
    static load_profile piecewise(std::vector<profile_point> points, double duration);

    /// Sampled profile with linear interpolation; duration is the last
    /// sample time unless overridden.
    static load_profile sampled(std::vector<profile_point> points,
                                std::optional<double> duration = std::nullopt);

    profile_mode mode() const noexcept { return mode_; }
    double duration() const noexcept { return duration_; }
    const std::vector<profile_point>& points() const noexcept { return points_; }

    /// F_load(t) for t in [0, duration].
    double load_at(double t) const;

private:
    load_profile(profile_mode mode, std::vector<profile_point> points, double duration);

    profile_mode mode_;
    std::vector<profile_point> points_;
    double duration_;
};

struct trajectory_sample {
    double time = 0.0;   ///< minutes
    double f_cem = 0.0;  ///< newtons
};

/// Sampled capacity decay F_cem(t); F_cem(0) = MVC and the curve is
/// non-increasing for non-negative loads.
struct capacity_trajectory {
    std::vector<trajectory_sample> samples;
    fatigue_params params;
};

/// Remaining capacity after holding a constant load for t minutes:
///   F_cem(t) = MVC * exp(-k * f_load * t / MVC).
double fcem_static(double t, double f_load, const fatigue_params& params);

/// Capacity at time t under an arbitrary profile. Piecewise-constant
/// profiles use the exact per-segment exponential; sampled profiles are
/// integrated with fixed-step classical Runge-Kutta (step `rk_step`).
double capacity_at(const load_profile& profile, const fatigue_params& params, double t,
                   double rk_step = 1e-3);

/// Simulates F_cem over the whole profile, sampled at multiples of `step`
/// plus all segment boundaries.
capacity_trajectory simulate_capacity(const load_profile& profile, const fatigue_params& params,
                                      double step);

/// Maximum endurance time of a constant relative load:
///   MET = -ln(f_mvc) / (k * f_mvc),  0 < f_mvc <= 1.
/// f_mvc = 1 gives 0 exactly.
double met_extended(double f_mvc, double k);

/// First time in [0, duration] at which capacity falls to the load level,
/// i.e. the smallest t with F_cem(t) <= F_load(t), located by bracketing
/// plus bisection to 1e-9 min. Returns nullopt when capacity stays above
/// the load over the whole profile. Throws infeasible_load when
/// F_load(0) > MVC.
std::optional<double> endurance_time(const load_profile& profile, const fatigue_params& params);

}  // namespace metsim
