#pragma once

#include "sto/line.hpp"

#include <array>
#include <deque>
#include <optional>
#include <string>

namespace sto {

// Physical constants of the consist (defaults mirror the DKZ32 six-vehicle EMU).
struct TrainParams {
    double static_mass_kg = 1.99e5;
    double rotating_factor = 0.08;  // eta: rotational-inertia mass surcharge
    std::array<double, 6> vehicle_masses_kg = {3.3e4, 3.5e4, 2.8e4, 3.5e4, 3.5e4, 3.3e4};

    // Running-resistance coefficients. With davis_specific = true they are specific
    // resistance in N/kN with v in km/h (standard railway convention, matches the
    // magnitudes of the shipped data); with false they are raw newtons with v in m/s.
    double davis_d1 = 1.244;
    double davis_d2 = 1.45e-2;
    double davis_d3 = 1.36e-4;
    bool davis_specific = true;

    // Inter-vehicle oscillation: delta_l = amp_sin*sin(t) mm on couplings 1,3,6
    // and amp_cos*cos(t) mm on couplings 2,4,5.
    double osc_sin_amp_mm = 0.1;
    double osc_cos_amp_mm = 0.15;

    // First-order lag + pure dead time per actuation regime.
    double traction_time_constant_s = 0.4;
    double traction_delay_s = 1.0;
    double braking_time_constant_s = 0.4;
    double braking_delay_s = 0.8;
    double actuator_gain = 1.0;

    double min_deceleration_mps2 = -1.0;  // u_min, full service braking
    double gravity_mps2 = 9.8;

    double effective_mass_kg() const { return static_mass_kg * (1.0 + rotating_factor); }
    void validate() const;  // throws ValidationError
};

TrainParams load_train_params(const std::string& path);

// ---- forces (newtons; positive values oppose motion except gradient sign) ----

// F_g = M g sin(alpha(s)); positive uphill.
double gradient_force(const TrainParams& p, const LineProfile& line, double s_m);
// Davis running resistance at speed v (>= 0).
double davis_force(const TrainParams& p, double v_mps);
// Curve resistance 6.3 * M_tonnes / (r - 55) as specific resistance; 0 on straight track.
double curve_force(const TrainParams& p, const LineProfile& line, double s_m);
// Inter-vehicle impact force: sum over couplings of ddot(delta_l_i) * trailing mass.
double interaction_force(const TrainParams& p, double t_s);
// u = (F_out - F_g - F_r - F_c - F_d) / (M (1 + eta))
double net_acceleration(const TrainParams& p, const LineProfile& line, double t_s, double s_m,
                        double v_mps, double output_force_n);

// ---- actuator: dead time + first-order lag, one pipeline per regime ----

class ActuatorState {
public:
    ActuatorState(const TrainParams& p, double substep_s);

    // Push one commanded acceleration (held for one substep) and advance both
    // pipelines. Commands >= 0 feed the traction pipeline, < 0 the braking one.
    // Returns the realized acceleration (sum of the two lag states).
    double step(double commanded_mps2);

    double realized() const { return traction_.lag + braking_.lag; }
    void reset();

private:
    struct Pipeline {
        std::deque<double> queue;  // fixed length = ceil(delay / substep)
        std::size_t length = 0;
        double lag = 0;
        double decay = 0;          // exp(-substep / time_constant); 0 for instant tracking
        double gain = 1;

        void configure(double delay_s, double time_constant_s, double gain_, double substep_s);
        double advance(double input);
        void clear();
    };
    Pipeline traction_;
    Pipeline braking_;
};

// ---- state & integration ----

struct TrainState {
    double t_s = 0;
    double s_m = 0;
    double v_mps = 0;            // clamped at 0, the train never rolls backward
    double u_actual = 0;         // actuator-realized acceleration
    double u_commanded_prev = 0; // previous post-guard command
};

struct StepOutcome {
    TrainState state;
    double delta_Ie = 0;     // |u_actual| * v_at_step_start * dt  (per-mass energy)
    double jerk = 0;         // |u_actual_end - u_actual_start| / dt
    bool crossed = false;    // reached stop_at_m during the step
    bool overshoot = false;  // raw position passed strictly beyond stop_at_m
};

// Advance one control step of length dt_s with a fixed command, integrating the
// physics at substep_s (dt must be an integer multiple of the substep). When
// stop_at_m is set and the train crosses it, integration halts at the crossing:
// the returned state carries the interpolated time/velocity and s == stop_at_m.
StepOutcome integrate_control_step(const TrainState& state, ActuatorState& actuator,
                                   const TrainParams& params, const LineProfile& line,
                                   double commanded_u, double dt_s, double substep_s,
                                   std::optional<double> stop_at_m = std::nullopt);

} // namespace sto
