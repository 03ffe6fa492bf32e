#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "metsim/fatigue.hpp"

using namespace metsim;

namespace {

constexpr double kMetHalf = 1.3862943611198906;  // -ln(0.5)/0.5

fatigue_params params(double mvc, double k = 1.0) { return fatigue_params{mvc, k}; }

load_profile constant_profile(double load, double duration) {
    return load_profile::piecewise({{0.0, load}}, duration);
}

}  // namespace

TEST_CASE("fcem_static boundary and closed-form values") {
    CHECK(fcem_static(0.0, 77.0, params(100.0)) == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(fcem_static(5.0, 0.0, params(100.0)) == doctest::Approx(100.0).epsilon(1e-15));
    // capacity meets the load exactly at the endurance time of f = 0.5
    CHECK(fcem_static(kMetHalf, 50.0, params(100.0)) == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(fcem_static(0.7, 35.0, params(120.0, 1.7)) ==
          doctest::Approx(84.809571632141399).epsilon(1e-14));
}

TEST_CASE("fcem_static input validation") {
    CHECK_THROWS_AS(fcem_static(-1.0, 50.0, params(100.0)), invalid_input);
    CHECK_THROWS_AS(fcem_static(1.0, -2.0, params(100.0)), invalid_input);
    CHECK_THROWS_AS(fcem_static(std::numeric_limits<double>::quiet_NaN(), 1.0, params(100.0)),
                    invalid_input);
    CHECK_THROWS_AS(fcem_static(1.0, std::numeric_limits<double>::infinity(), params(100.0)),
                    invalid_input);
    CHECK_THROWS_AS(fcem_static(1.0, 1.0, params(0.0)), invalid_input);
    CHECK_THROWS_AS(fcem_static(1.0, 1.0, params(100.0, -1.0)), invalid_input);
}

TEST_CASE("fcem_static is monotone in time and load") {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const fatigue_params p{50.0 + 200.0 * u(rng), 0.1 + 3.0 * u(rng)};
        const double load = p.mvc * u(rng);
        double t1 = 10.0 * u(rng);
        double t2 = 10.0 * u(rng);
        if (t1 > t2) std::swap(t1, t2);
        CHECK(fcem_static(t2, load, p) <= fcem_static(t1, load, p));

        double l1 = p.mvc * u(rng);
        double l2 = p.mvc * u(rng);
        if (l1 > l2) std::swap(l1, l2);
        const double t = 10.0 * u(rng);
        CHECK(fcem_static(t, l2, p) <= fcem_static(t, l1, p));
    }
}

TEST_CASE("scaling load and MVC together leaves relative capacity unchanged") {
    std::mt19937_64 rng(20240602);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double mvc = 50.0 + 150.0 * u(rng);
        const double load = mvc * u(rng);
        const double k = 0.2 + 2.0 * u(rng);
        const double t = 8.0 * u(rng);
        const double c = 0.1 + 10.0 * u(rng);
        const double rel = fcem_static(t, load, {mvc, k}) / mvc;
        const double rel_scaled = fcem_static(t, c * load, {c * mvc, k}) / (c * mvc);
        CHECK(rel_scaled == doctest::Approx(rel).epsilon(1e-12));
    }
}

TEST_CASE("met_extended values and errors") {
    CHECK(met_extended(1.0, 1.0) == 0.0);
    CHECK(met_extended(1.0, 2.0) == 0.0);
    CHECK(met_extended(0.5, 1.0) == doctest::Approx(kMetHalf).epsilon(1e-15));
    CHECK(met_extended(0.5, 0.5) == doctest::Approx(2.7725887222397811).epsilon(1e-15));
    CHECK(met_extended(0.99, 1.0) == doctest::Approx(0.010151854397476213).epsilon(1e-15));
    CHECK(met_extended(0.3, 0.8) == doctest::Approx(5.0165533513580671).epsilon(1e-15));

    CHECK_THROWS_AS(met_extended(0.0, 1.0), invalid_input);
    CHECK_THROWS_AS(met_extended(-0.2, 1.0), invalid_input);
    CHECK_THROWS_AS(met_extended(1.0001, 1.0), invalid_input);
    CHECK_THROWS_AS(met_extended(0.5, 0.0), invalid_input);
    CHECK_THROWS_AS(met_extended(0.5, -1.0), invalid_input);
    CHECK_THROWS_AS(met_extended(std::numeric_limits<double>::quiet_NaN(), 1.0), invalid_input);
}

TEST_CASE("met_extended * k does not depend on k") {
    std::mt19937_64 rng(20240603);
    std::uniform_real_distribution<double> uf(0.01, 1.0);
    std::uniform_real_distribution<double> uk(0.05, 5.0);
    for (int i = 0; i < 2000; ++i) {
        const double f = uf(rng);
        const double k1 = uk(rng);
        const double k2 = uk(rng);
        CHECK(met_extended(f, k1) * k1 ==
              doctest::Approx(met_extended(f, k2) * k2).epsilon(1e-12));
    }
}

TEST_CASE("met_extended is strictly decreasing in f_mvc") {
    std::mt19937_64 rng(20240604);
    std::uniform_real_distribution<double> uf(0.01, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double f1 = uf(rng), f2 = uf(rng);
        if (f1 == f2) continue;
        if (f1 > f2) std::swap(f1, f2);
        CHECK(met_extended(f1, 1.0) > met_extended(f2, 1.0));
    }
}

TEST_CASE("load_profile validation") {
    CHECK_THROWS_AS(load_profile::piecewise({}, 1.0), invalid_input);
    CHECK_THROWS_AS(load_profile::piecewise({{0.5, 10.0}}, 1.0), invalid_input);     // t0 != 0
    CHECK_THROWS_AS(load_profile::piecewise({{0.0, -1.0}}, 1.0), invalid_input);     // load < 0
    CHECK_THROWS_AS(load_profile::piecewise({{0.0, 1.0}, {0.0, 2.0}}, 1.0), invalid_input);
    CHECK_THROWS_AS(load_profile::piecewise({{0.0, 1.0}, {2.0, 2.0}}, 1.5), invalid_input);
    CHECK_THROWS_AS(load_profile::sampled({{0.0, 1.0}}, 0.0), invalid_input);

    const auto p = load_profile::piecewise({{0.0, 30.0}, {1.0, 60.0}}, 2.0);
    CHECK(p.load_at(0.0) == 30.0);
    CHECK(p.load_at(0.999) == 30.0);
    CHECK(p.load_at(1.0) == 60.0);
    CHECK(p.load_at(2.0) == 60.0);

    const auto s = load_profile::sampled({{0.0, 0.0}, {2.0, 10.0}});
    CHECK(s.load_at(1.0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(s.duration() == 2.0);
}

TEST_CASE("simulate_capacity piecewise uses the exact exponential") {
    const fatigue_params p = params(100.0);

    SUBCASE("constant load reaches the load level at its endurance time") {
        const auto traj = simulate_capacity(constant_profile(50.0, kMetHalf), p, 0.1);
        CHECK(traj.samples.front().time == 0.0);
        CHECK(traj.samples.front().f_cem == doctest::Approx(100.0).epsilon(1e-15));
        CHECK(traj.samples.back().time == doctest::Approx(kMetHalf).epsilon(1e-15));
        CHECK(traj.samples.back().f_cem == doctest::Approx(50.0).epsilon(1e-12));
    }

    SUBCASE("two segments accumulate exponents exactly") {
        const auto profile = load_profile::piecewise({{0.0, 30.0}, {1.0, 60.0}}, 2.0);
        const auto traj = simulate_capacity(profile, p, 0.25);
        CHECK(traj.samples.back().time == 2.0);
        CHECK(traj.samples.back().f_cem ==
              doctest::Approx(40.656965974059915).epsilon(1e-13));
        // segment boundary is sampled even though it is not a step multiple
        const auto profile2 = load_profile::piecewise({{0.0, 30.0}, {0.95, 60.0}}, 2.0);
        const auto traj2 = simulate_capacity(profile2, p, 0.25);
        bool has_boundary = false;
        for (const auto& s : traj2.samples) has_boundary |= (s.time == 0.95);
        CHECK(has_boundary);
    }

    SUBCASE("zero load stays flat at MVC") {
        const auto traj = simulate_capacity(constant_profile(0.0, 5.0), p, 0.5);
        for (const auto& s : traj.samples) CHECK(s.f_cem == 100.0);
    }

    SUBCASE("step validation") {
        CHECK_THROWS_AS(simulate_capacity(constant_profile(10.0, 1.0), p, 0.0), invalid_input);
        CHECK_THROWS_AS(simulate_capacity(constant_profile(10.0, 1.0), p, -0.1), invalid_input);
    }
}

TEST_CASE("trajectory invariants on random piecewise profiles") {
    std::mt19937_64 rng(20240605);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const fatigue_params p{60.0 + 140.0 * u(rng), 0.3 + 2.0 * u(rng)};
        std::vector<profile_point> pts{{0.0, p.mvc * u(rng)}};
        double t = 0.0;
        const int n_seg = 1 + static_cast<int>(u(rng) * 4);
        for (int s = 1; s < n_seg; ++s) {
            t += 0.2 + 2.0 * u(rng);
            pts.push_back({t, p.mvc * u(rng)});
        }
        const auto profile = load_profile::piecewise(pts, t + 1.0 + 3.0 * u(rng));
        const auto traj = simulate_capacity(profile, p, 0.037);
        CHECK(traj.samples.front().f_cem == p.mvc);
        for (std::size_t j = 1; j < traj.samples.size(); ++j) {
            CHECK(traj.samples[j].f_cem <= traj.samples[j - 1].f_cem);
            CHECK(traj.samples[j].f_cem > 0.0);
            CHECK(traj.samples[j].f_cem <= p.mvc);
        }
    }
}

TEST_CASE("RK4 integration matches the closed form for constant loads") {
    std::mt19937_64 rng(20240606);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 25; ++i) {
        const fatigue_params p{50.0 + 150.0 * u(rng), 0.2 + 2.5 * u(rng)};
        const double load = p.mvc * (0.05 + 0.9 * u(rng));
        const double duration = 0.5 + 3.0 * u(rng);
        // sampled mode forces the numeric path
        const auto profile = load_profile::sampled({{0.0, load}, {duration, load}});
        const auto traj = simulate_capacity(profile, p, 0.001);
        for (const auto& s : traj.samples) {
            const double exact = fcem_static(s.time, load, p);
            CHECK(s.f_cem == doctest::Approx(exact).epsilon(1e-6));
        }
    }
}

TEST_CASE("RK4 handles a linear ramp") {
    // load(t) = 20 + 10 t on [0, 4]: integral is 20 t + 5 t^2, so
    // F(4) = 100 exp(-160/100).
    const auto profile = load_profile::sampled({{0.0, 20.0}, {4.0, 60.0}});
    const double f4 = capacity_at(profile, params(100.0), 4.0);
    CHECK(f4 == doctest::Approx(20.189651799465537).epsilon(1e-9));
}

TEST_CASE("endurance_time agrees with met_extended for constant loads") {
    const auto t = endurance_time(constant_profile(50.0, 10.0), params(100.0));
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(kMetHalf).epsilon(1e-7));

    const auto t99 = endurance_time(constant_profile(99.0, 10.0), params(100.0));
    REQUIRE(t99.has_value());
    CHECK(*t99 == doctest::Approx(0.010151854397476213).epsilon(1e-6));

    // k scaling
    const auto tk = endurance_time(constant_profile(50.0, 10.0), params(100.0, 2.0));
    REQUIRE(tk.has_value());
    CHECK(*tk == doctest::Approx(kMetHalf / 2.0).epsilon(1e-7));
}

TEST_CASE("endurance_time edge cases") {
    SUBCASE("capacity never reaches a light load in a short window") {
        CHECK_FALSE(endurance_time(constant_profile(10.0, 0.1), params(100.0)).has_value());
    }
    SUBCASE("zero load never crosses") {
        CHECK_FALSE(endurance_time(constant_profile(0.0, 50.0), params(100.0)).has_value());
    }
    SUBCASE("load above MVC at t = 0 is infeasible, not exhaustion") {
        CHECK_THROWS_AS(endurance_time(constant_profile(150.0, 1.0), params(100.0)),
                        infeasible_load);
        try {
            endurance_time(constant_profile(150.0, 1.0), params(100.0));
        } catch (const infeasible_load& e) {
            CHECK(e.load() == 150.0);
            CHECK(e.mvc() == 100.0);
        }
    }
    SUBCASE("load equal to MVC crosses immediately") {
        const auto t = endurance_time(constant_profile(100.0, 1.0), params(100.0));
        REQUIRE(t.has_value());
        CHECK(*t == 0.0);
    }
    SUBCASE("a step up to a load above remaining capacity crosses at the boundary") {
        // F_cem(1) = 100 exp(-0.1) = 90.48 N < 95 N
        const auto profile = load_profile::piecewise({{0.0, 10.0}, {1.0, 95.0}}, 3.0);
        const auto t = endurance_time(profile, params(100.0));
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("sampled profile with constant load matches the analytic time") {
        const auto profile = load_profile::sampled({{0.0, 50.0}, {10.0, 50.0}});
        const auto t = endurance_time(profile, params(100.0));
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(kMetHalf).epsilon(1e-6));
    }
}
