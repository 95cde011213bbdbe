#pragma once

#include "sto/line.hpp"
#include "sto/trajectory.hpp"

#include <string>

namespace sto {

// Jerk above this rate (m/s^3) counts against riding comfort.
inline constexpr double kComfortJerkThreshold = 0.30;
// Arrival within this many seconds of the plan counts as punctual.
inline constexpr double kPunctualityToleranceS = 3.0;

struct EvaluationReport {
    int safety = 0;        // I_s
    int punctuality = 0;   // I_t
    double time_error_s = 0;
    double energy = 0;     // I_e, per-mass energy
    double comfort = 0;    // I_c, accumulated above-threshold jerk
    double actual_time_s = 0;
};

// I_s: 1 iff every sample respects the local speed limit (inclusive).
int safety_index(const Trajectory& traj, const LineProfile& line);

// Arrival time: first t with s >= destination, linearly interpolated inside the
// crossing step. Throws InfeasibleError if the trajectory never arrives.
double actual_time(const Trajectory& traj, double destination_m);

// (I_t, e_t): e_t = |T_actual - T_planning|, punctual iff e_t <= 3 s.
struct Punctuality { int index; double error_s; };
Punctuality punctuality_index(const Trajectory& traj, double destination_m);

// I_e = sum_i |u_i| v_i dt over samples (left endpoint, same-row pairing).
double energy_index(const Trajectory& traj, double dt_s);

// I_c = sum of |u_i - u_{i-1}|/dt over consecutive samples where it exceeds the threshold.
double comfort_index(const Trajectory& traj, double dt_s, double threshold = kComfortJerkThreshold);

EvaluationReport evaluate(const Trajectory& traj, const LineProfile& line);

// Table-style one-line rendering: t, I_t, I_s, I_e, I_c (times rounded to seconds).
std::string format_report(const EvaluationReport& r);

} // namespace sto
