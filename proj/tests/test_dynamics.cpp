#include <doctest.h>

#include "sto/dynamics.hpp"
#include "sto/errors.hpp"

#include <cmath>

using namespace sto;

namespace {

LineProfile flat_line(double length = 20000.0, double limit = 100.0) {
    return LineProfile({TrackSection{0, length, limit, 0, {}}}, 100.0);
}

LineProfile graded_line(double grade_permille) {
    return LineProfile(
        {TrackSection{0, 20000.0, 100.0, grade_permille_to_angle(grade_permille), {}}}, 100.0);
}

TrainParams ideal_params() {
    TrainParams p;
    p.davis_d1 = p.davis_d2 = p.davis_d3 = 0;
    p.osc_sin_amp_mm = p.osc_cos_amp_mm = 0;
    p.traction_delay_s = p.braking_delay_s = 0;
    p.traction_time_constant_s = p.braking_time_constant_s = 0;
    p.rotating_factor = 0;
    return p;
}

} // namespace

TEST_CASE("parameter file mirrors the built-in DKZ32 defaults") {
    const TrainParams file = load_train_params("data/dkz32.params");
    const TrainParams def;
    CHECK(file.static_mass_kg == def.static_mass_kg);
    CHECK(file.davis_d1 == def.davis_d1);
    CHECK(file.davis_d2 == def.davis_d2);
    CHECK(file.davis_d3 == def.davis_d3);
    CHECK(file.traction_delay_s == def.traction_delay_s);
    CHECK(file.braking_delay_s == def.braking_delay_s);
    CHECK(file.vehicle_masses_kg == def.vehicle_masses_kg);
}

TEST_CASE("mass bookkeeping: vehicle masses must sum to the static mass") {
    TrainParams p;
    p.validate();  // 2*3.3e4 + 2.8e4 + 3*3.5e4 == 1.99e5
    p.vehicle_masses_kg[0] = 1e4;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("gradient force") {
    const TrainParams p;
    CHECK(gradient_force(p, flat_line(), 100.0) == 0.0);

    const double oracle = 1.99e5 * 9.8 * std::sin(std::atan(0.002));
    CHECK(gradient_force(p, graded_line(2.0), 100.0) ==
          doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle == doctest::Approx(3.90e3).epsilon(1e-2));  // the hand value
    CHECK(gradient_force(p, graded_line(-2.0), 100.0) ==
          doctest::Approx(-oracle).epsilon(1e-12));
}

TEST_CASE("davis running resistance in specific-resistance units") {
    const TrainParams p;
    const double at_rest = 1.244 * 1.99e5 * 9.8 / 1000.0;
    CHECK(davis_force(p, 0.0) == doctest::Approx(at_rest).epsilon(1e-12));
    CHECK(at_rest == doctest::Approx(2.426e3).epsilon(1e-3));

    const double v = 18.86;  // 67.896 km/h
    const double kmh = 3.6 * v;
    const double w = 1.244 + 1.45e-2 * kmh + 1.36e-4 * kmh * kmh;
    CHECK(davis_force(p, v) == doctest::Approx(w * 1.99e5 * 9.8 / 1000.0).epsilon(1e-12));
    CHECK(davis_force(p, v) == doctest::Approx(5.57e3).epsilon(2e-3));

    // strictly increasing in speed
    double prev = davis_force(p, 0.0);
    for (double s = 0.5; s < 25.0; s += 0.5) {
        const double f = davis_force(p, s);
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("davis raw-newton mode") {
    TrainParams p;
    p.davis_specific = false;
    p.davis_d1 = 1000;
    p.davis_d2 = 10;
    p.davis_d3 = 1;
    CHECK(davis_force(p, 5.0) == doctest::Approx(1000 + 50 + 25).epsilon(1e-15));
}

TEST_CASE("curve resistance") {
    const TrainParams p;
    CHECK(curve_force(p, flat_line(), 10.0) == 0.0);

    const LineProfile curved({TrackSection{0, 1000, 30, 0, 355.0}}, 100.0);
    const double w = 6.3 * 199.0 / 300.0;  // 6.3 M_tonnes / (r - 55)
    const double oracle = w * 1.99e5 * 9.8 / 1000.0;
    CHECK(curve_force(p, curved, 10.0) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(oracle == doctest::Approx(8.15e3).epsilon(1e-3));

    // decreasing in radius
    const LineProfile wide({TrackSection{0, 1000, 30, 0, 800.0}}, 100.0);
    CHECK(curve_force(p, wide, 10.0) < curve_force(p, curved, 10.0));
}

TEST_CASE("interaction force from the inter-vehicle oscillation") {
    TrainParams p;
    SUBCASE("zero amplitudes kill it") {
        p.osc_sin_amp_mm = p.osc_cos_amp_mm = 0;
        CHECK(interaction_force(p, 0.0) == 0.0);
        CHECK(interaction_force(p, 3.7) == 0.0);
    }
    SUBCASE("hand-expanded double sum at t = 0") {
        // cos couplings 2,4,5: ddot = -0.15e-3; trailing masses 1.31e5, 6.8e4, 3.3e4
        const double oracle = -1.5e-4 * (1.31e5 + 6.8e4 + 3.3e4);
        CHECK(oracle == doctest::Approx(-34.8).epsilon(1e-12));
        CHECK(interaction_force(p, 0.0) == doctest::Approx(oracle).epsilon(1e-12));
    }
    SUBCASE("triangle-inequality bound for all t") {
        const double trailing[5] = {1.66e5, 1.31e5, 1.03e5, 6.8e4, 3.3e4};
        double bound = 0;
        for (int i = 1; i <= 5; ++i) {
            const double amp = (i == 1 || i == 3) ? 0.1e-3 : 0.15e-3;
            bound += amp * trailing[i - 1];
        }
        for (double t = 0; t < 20.0; t += 0.37)
            CHECK(std::abs(interaction_force(p, t)) <= bound + 1e-12);
    }
}

TEST_CASE("net acceleration composes the four resistances") {
    const TrainParams p;
    const LineProfile line = flat_line();

    SUBCASE("force balance gives zero") {
        const double resist = davis_force(p, 10.0) + interaction_force(p, 5.0);
        CHECK(net_acceleration(p, line, 5.0, 100.0, 10.0, resist) ==
              doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("rest on a flat line, zero output") {
        TrainParams q = p;
        q.osc_sin_amp_mm = q.osc_cos_amp_mm = 0;
        const double expect = -(1.244 * 1.99e5 * 9.8 / 1000.0) / (1.99e5 * 1.08);
        CHECK(net_acceleration(q, line, 0.0, 0.0, 0.0, 0.0) ==
              doctest::Approx(expect).epsilon(1e-12));
        CHECK(expect == doctest::Approx(-0.0113).epsilon(1e-2));
    }
    SUBCASE("rotating-factor ratio") {
        TrainParams a = p, b = p;
        b.rotating_factor = 2.0 * a.rotating_factor;
        const double ua = net_acceleration(a, line, 0.0, 0.0, 5.0, 0.0);
        const double ub = net_acceleration(b, line, 0.0, 0.0, 5.0, 0.0);
        CHECK(ub / ua == doctest::Approx((1 + a.rotating_factor) /
                                         (1 + b.rotating_factor)).epsilon(1e-12));
    }
}

TEST_CASE("actuator step response: dead time then first-order rise") {
    const TrainParams p;  // traction delay 1.0, lag 0.4
    const double h = 0.1;

    SUBCASE("traction") {
        ActuatorState act(p, h);
        double realized = 0;
        // dead time: the first value to leave the queue is the command from 1.0 s ago
        for (int k = 1; k <= 10; ++k) {
            realized = act.step(1.0);
            CHECK(realized == 0.0);
        }
        // rise: at t = T_d + T_c the response sits at 1 - 1/e
        for (int k = 11; k <= 14; ++k) realized = act.step(1.0);
        CHECK(realized == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
        CHECK(std::abs(realized - 0.632) < 0.02);
    }
    SUBCASE("braking pipe has the shorter 0.8 s dead time") {
        ActuatorState act(p, h);
        double realized = 0;
        for (int k = 1; k <= 8; ++k) {
            realized = act.step(-1.0);
            CHECK(realized == 0.0);
        }
        realized = act.step(-1.0);
        CHECK(realized < 0.0);
    }
    SUBCASE("zero command decays the lag toward zero") {
        ActuatorState act(p, h);
        for (int k = 0; k < 60; ++k) act.step(1.0);
        for (int k = 0; k < 10; ++k) act.step(0.0);  // zeros travel the dead-time queue
        double prev = std::abs(act.realized());
        for (int k = 0; k < 40; ++k) {
            act.step(0.0);
            const double cur = std::abs(act.realized());
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
        CHECK(prev < 1e-3);
    }
}

TEST_CASE("integration: rest stays rest under zero command") {
    const TrainParams p;
    const LineProfile line = flat_line();
    ActuatorState act(p, 0.1);
    const StepOutcome out = integrate_control_step(TrainState{}, act, p, line, 0.0, 1.0, 0.1);
    CHECK(out.state.v_mps == 0.0);
    CHECK(out.state.s_m == 0.0);
    CHECK(out.delta_Ie == 0.0);
}

TEST_CASE("integration matches uniformly accelerated motion with an ideal actuator") {
    const TrainParams p = ideal_params();
    const LineProfile line = flat_line();
    ActuatorState act(p, 0.1);
    TrainState st;
    double energy = 0;
    for (int i = 0; i < 10; ++i) {
        const StepOutcome out = integrate_control_step(st, act, p, line, 0.5, 1.0, 0.1);
        st = out.state;
        energy += out.delta_Ie;
    }
    CHECK(st.v_mps == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(st.s_m == doctest::Approx(25.0).epsilon(1e-3));

    // discrete left-endpoint energy sum: sum_i |0.5| * v(t_i) * dt
    double oracle = 0;
    for (int i = 0; i < 10; ++i) oracle += 0.5 * (0.5 * i) * 1.0;
    CHECK(energy == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("halving the substep barely moves the end state") {
    const TrainParams p;
    const LineProfile line = flat_line();
    auto run = [&](double h) {
        ActuatorState act(p, h);
        TrainState st;
        for (int i = 0; i < 40; ++i)
            st = integrate_control_step(st, act, p, line, i < 25 ? 0.8 : -0.6, 1.0, h).state;
        return st;
    };
    const TrainState coarse = run(0.1);
    const TrainState fine = run(0.05);
    CHECK(std::abs(coarse.s_m - fine.s_m) < 0.5);
    CHECK(std::abs(coarse.v_mps - fine.v_mps) < 0.05);
}

TEST_CASE("jerk reports the realized change across the control step") {
    const TrainParams p = ideal_params();
    const LineProfile line = flat_line();
    ActuatorState act(p, 0.1);
    TrainState st;
    StepOutcome out = integrate_control_step(st, act, p, line, 0.5, 1.0, 0.1);
    CHECK(out.jerk == doctest::Approx(0.5).epsilon(1e-12));
    out = integrate_control_step(out.state, act, p, line, 0.5, 1.0, 0.1);
    CHECK(out.jerk == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("crossing a stop position interpolates inside the substep") {
    const TrainParams p = ideal_params();
    const LineProfile line = flat_line(100.0);
    ActuatorState act(p, 0.1);
    TrainState st;
    st.v_mps = 10.0;  // exactly 10 m/s, no resistances: crossing 95 m at t = 9.5 s
    for (int i = 0; i < 12; ++i) {
        const StepOutcome out =
            integrate_control_step(st, act, p, line, 0.0, 1.0, 0.1, 95.0);
        st = out.state;
        if (out.crossed) {
            CHECK(st.s_m == 95.0);
            CHECK(st.t_s == doctest::Approx(9.5).epsilon(1e-9));
            CHECK(st.v_mps == doctest::Approx(10.0).epsilon(1e-9));
            return;
        }
    }
    FAIL("never crossed");
}

TEST_CASE("dt must be an integer multiple of the substep") {
    const TrainParams p;
    const LineProfile line = flat_line();
    ActuatorState act(p, 0.3);
    CHECK_THROWS_AS(integrate_control_step(TrainState{}, act, p, line, 0.0, 1.0, 0.3),
                    ValidationError);
}
