#pragma once

#include "sto/dynamics.hpp"
#include "sto/line.hpp"

#include <optional>
#include <string>

namespace sto {

enum class DriveState { accelerating, coasting, braking };

enum class GuardRule { none, no_direct_transition, start_cap, safe_velocity_brake, current_limit_clamp };

const char* to_string(GuardRule rule);

struct GuardConfig {
    double beta = 0.95;                 // speed proportional coefficient on the next limit
    double u_min = -1.0;                // full service braking, m/s^2
    double start_accel_cap = 0.6;       // acceleration cap while the train starts
    double coast_band = 0.05;           // |u| <= band counts as coasting
    double start_speed_threshold = 2.0; // start phase = v below this, m/s

    // Actuation anticipation: the pipeline dead time plus lag tail during which the
    // realized acceleration may ignore a new command. Both triggers below look this
    // far ahead so that sampled speeds never cross a limit.
    double reaction_time_s = 1.6;
    double gravity_mps2 = 9.8;

    void validate() const;  // throws ValidationError
};

struct GuardDecision {
    double final_u = 0;
    GuardRule rule = GuardRule::none;
};

// v_safe per the inference rule: from the nearest downstream limit drop (s_lim, v_next),
// sqrt(beta * v_next^2 - 2 u_min (s_lim - s)). Absent when no lower limit lies ahead.
std::optional<double> safe_velocity(const LineProfile& line, double s_m, const GuardConfig& cfg);

DriveState classify_state(double u, const GuardConfig& cfg);

// Applies the expert rules in priority order to a proposed command and returns the
// command actually allowed to reach the actuator. dt_s is the control interval.
GuardDecision filter_action(double proposed_u, const TrainState& state, const LineProfile& line,
                            const GuardConfig& cfg, double dt_s);

} // namespace sto
