#include <doctest.h>

#include "sto/errors.hpp"
#include "sto/metrics.hpp"
#include "sto/rng.hpp"
#include "sto/trajectory.hpp"

#include <cstdio>

using namespace sto;

namespace {

// Build a trajectory from (u during step i) rows; v and s follow kinematically.
Trajectory from_samples(const std::vector<double>& u, const std::vector<double>& v,
                        const std::vector<double>& s, double plan = 100.0) {
    Trajectory traj;
    traj.planning_trip_time_s = plan;
    traj.dt_s = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        traj.points.push_back(TrajectoryPoint{static_cast<double>(i), s[i], v[i], u[i], u[i], 0, 0, ""});
    return traj;
}

LineProfile uniform_line(double length, double limit) {
    return LineProfile({TrackSection{0, length, limit, 0, {}}}, 100.0);
}

} // namespace

TEST_CASE("safety index is an inclusive per-sample check") {
    const LineProfile line = uniform_line(100, 20);
    CHECK(safety_index(from_samples({0, 0, 0}, {10, 10, 10}, {0, 10, 20}), line) == 1);
    CHECK(safety_index(from_samples({0, 0, 0}, {10, 20.01, 10}, {0, 10, 20}), line) == 0);
    CHECK(safety_index(from_samples({0, 0, 0}, {10, 20.0, 10}, {0, 10, 20}), line) == 1);
}

TEST_CASE("safety index equals a brute-force scan on random trajectories") {
    const LineProfile line(
        {TrackSection{0, 500, 18, 0, {}}, TrackSection{500, 1000, 12, 0, {}}}, 100.0);
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        Trajectory traj;
        traj.dt_s = 1.0;
        traj.planning_trip_time_s = 100;
        bool any_violation = false;
        double s = 0;
        for (int i = 0; i < 40; ++i) {
            const double v = rng.uniform(0, 20);
            s += v;
            if (s > 1000) break;
            if (v > line.speed_limit_at(s)) any_violation = true;
            traj.points.push_back(TrajectoryPoint{static_cast<double>(i), s, v, 0, 0, 0, 0, ""});
        }
        if (traj.points.empty()) continue;
        CHECK(safety_index(traj, line) == (any_violation ? 0 : 1));
    }
}

TEST_CASE("punctuality with interpolated arrival") {
    // crossing 100 m between t=9 (s=95) and t=10 (s=105) -> T_actual = 9.5
    Trajectory traj = from_samples({0, 0}, {10, 10}, {95, 105}, 9.0);
    traj.points[0].t_s = 9;
    traj.points[1].t_s = 10;
    CHECK(actual_time(traj, 100.0) == doctest::Approx(9.5).epsilon(1e-12));

    SUBCASE("error at exactly 3 s is punctual, 3.5 is not") {
        Trajectory t3 = traj;
        t3.planning_trip_time_s = 12.5;  // e_t = 3.0
        const Punctuality p3 = punctuality_index(t3, 100.0);
        CHECK(p3.index == 1);
        CHECK(p3.error_s == doctest::Approx(3.0).epsilon(1e-12));
        t3.planning_trip_time_s = 13.0;  // e_t = 3.5
        CHECK(punctuality_index(t3, 100.0).index == 0);
    }
    SUBCASE("102 vs 101 from the published table") {
        Trajectory t = from_samples({0, 0}, {10, 10}, {1270, 1280}, 101.0);
        t.points[0].t_s = 101;
        t.points[1].t_s = 102;
        const Punctuality p = punctuality_index(t, 1280.0);
        CHECK(p.index == 1);
        CHECK(p.error_s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("never reaching the destination raises") {
    const Trajectory traj = from_samples({0, 0}, {1, 1}, {0, 1});
    CHECK_THROWS_AS(actual_time(traj, 100.0), InfeasibleError);
    CHECK_THROWS_AS(punctuality_index(traj, 100.0), InfeasibleError);
}

TEST_CASE("energy index: hand-summed left-endpoint convention") {
    const Trajectory traj = from_samples({1, 1, 0}, {0, 1, 2}, {0, 0.5, 2});
    CHECK(energy_index(traj, 1.0) == 1.0);  // 0 + 1 + 0, exactly

    SUBCASE("all-coasting is free") {
        CHECK(energy_index(from_samples({0, 0, 0}, {5, 5, 5}, {0, 5, 10}), 1.0) == 0.0);
    }
    SUBCASE("bilinear scaling") {
        const Trajectory doubled = from_samples({2, 2, 0}, {0, 2, 4}, {0, 1, 4});
        CHECK(energy_index(doubled, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
    }
}

TEST_CASE("comfort index sums only above-threshold jerks") {
    CHECK(comfort_index(from_samples({0, 0.4, 0.4}, {0, 0, 0}, {0, 0, 0}), 1.0) ==
          doctest::Approx(0.4).epsilon(1e-15));
    CHECK(comfort_index(from_samples({0, 0.2, 0.4}, {0, 0, 0}, {0, 0, 0}), 1.0) == 0.0);
    CHECK(comfort_index(from_samples({0.5, 0.5, 0.5}, {0, 0, 0}, {0, 0, 0}), 1.0) == 0.0);

    SUBCASE("time translation leaves it unchanged") {
        Trajectory a = from_samples({0, 0.4, 0.4, 1.0}, {0, 0, 0, 0}, {0, 0, 0, 0});
        Trajectory b = a;
        for (auto& p : b.points) p.t_s += 17.0;
        CHECK(comfort_index(a, 1.0) == comfort_index(b, 1.0));
    }
    SUBCASE("growing one above-threshold jerk grows the index") {
        const double base = comfort_index(from_samples({0, 0.4, 0.4}, {0, 0, 0}, {0, 0, 0}), 1.0);
        const double more = comfort_index(from_samples({0, 0.5, 0.5}, {0, 0, 0}, {0, 0, 0}), 1.0);
        CHECK(more > base);
    }
}

TEST_CASE("evaluate aggregates all four indices") {
    const LineProfile line = uniform_line(100, 30);
    // reaches 100 m at t = 9.5 interpolated; plan 9.5 -> e_t = 0
    Trajectory traj = from_samples({1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                                   {0, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2},
                                   {0, 0.5, 2, 4, 6, 8, 10, 20, 40, 95, 105}, 9.5);
    const EvaluationReport rep = evaluate(traj, line);
    CHECK(rep.safety == 1);
    CHECK(rep.punctuality == 1);
    CHECK(rep.energy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.comfort == doctest::Approx(1.0).epsilon(1e-12));  // the single 1->0 step
    CHECK(rep.actual_time_s == doctest::Approx(9.5).epsilon(1e-9));
}

TEST_CASE("degenerate one-row trajectory") {
    Trajectory traj = from_samples({0.5}, {3.0}, {100.0}, 0.0);
    CHECK(comfort_index(traj, 1.0) == 0.0);
    CHECK(energy_index(traj, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("report renders in the table column order") {
    EvaluationReport r;
    r.actual_time_s = 101.7;
    r.punctuality = 1;
    r.safety = 1;
    r.energy = 531.77;
    r.comfort = 4.58;
    const std::string text = format_report(r);
    CHECK(text == "t=102s I_t=1 I_s=1 I_e=531.77 I_c=4.58");
}

TEST_CASE("trajectory CSV round-trips bit-exactly") {
    Trajectory traj;
    traj.planning_trip_time_s = 101.0;
    traj.dt_s = 1.0;
    Rng rng(5);
    double s = 0, t = 0;
    for (int i = 0; i < 30; ++i) {
        const double v = rng.uniform(0, 19.994837362);
        s += v;
        traj.points.push_back(TrajectoryPoint{t, s, v, rng.uniform(-1, 1), rng.uniform(-1, 1),
                                              rng.uniform(0, 9), rng.uniform(0, 2), "none"});
        t += 1.0;
    }
    write_trajectory_csv(traj, "roundtrip_tmp.csv");
    const Trajectory back = read_trajectory_csv("roundtrip_tmp.csv");
    REQUIRE(back.size() == traj.size());
    CHECK(back.planning_trip_time_s == traj.planning_trip_time_s);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(back.points[i].t_s == traj.points[i].t_s);
        CHECK(back.points[i].s_m == traj.points[i].s_m);
        CHECK(back.points[i].v_mps == traj.points[i].v_mps);
        CHECK(back.points[i].u_cmd == traj.points[i].u_cmd);
        CHECK(back.points[i].u_actual == traj.points[i].u_actual);
        CHECK(back.points[i].delta_Ie == traj.points[i].delta_Ie);
        CHECK(back.points[i].jerk == traj.points[i].jerk);
    }
    std::remove("roundtrip_tmp.csv");
}
