#pragma once

#include <string>
#include <vector>

namespace sto {

// One control-step sample. The row at time t carries the command issued at t and
// the acceleration the actuator realized over the following step; the terminal
// row (no step follows) records zeros for both.
struct TrajectoryPoint {
    double t_s = 0;
    double s_m = 0;
    double v_mps = 0;
    double u_cmd = 0;
    double u_actual = 0;
    double delta_Ie = 0;
    double jerk = 0;
    std::string rule;  // guard rule fired for this step, empty if none
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    double planning_trip_time_s = 0;
    double dt_s = 1.0;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
    const TrajectoryPoint& back() const { return points.back(); }
};

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

// (s, v) pairs for speed-distance profile plots.
void write_speed_distance_csv(const Trajectory& traj, const std::string& path);

} // namespace sto
