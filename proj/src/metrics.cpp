#include "sto/metrics.hpp"
#include "sto/errors.hpp"

#include <cmath>
#include <sstream>

namespace sto {

int safety_index(const Trajectory& traj, const LineProfile& line) {
    for (const TrajectoryPoint& p : traj.points) {
        const double s = std::min(p.s_m, line.total_length_m());
        if (p.v_mps > line.speed_limit_at(s)) return 0;
    }
    return 1;
}

double actual_time(const Trajectory& traj, double destination_m) {
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
        if (traj.points[i].s_m >= destination_m) {
            if (i == 0) return traj.points[0].t_s;
            const TrajectoryPoint& a = traj.points[i - 1];
            const TrajectoryPoint& b = traj.points[i];
            const double gained = b.s_m - a.s_m;
            const double f = gained > 0 ? (destination_m - a.s_m) / gained : 1.0;
            return a.t_s + f * (b.t_s - a.t_s);
        }
    }
    throw InfeasibleError("trajectory never reaches the destination at " +
                          std::to_string(destination_m) + " m");
}

Punctuality punctuality_index(const Trajectory& traj, double destination_m) {
    const double t_actual = actual_time(traj, destination_m);
    const double e_t = std::abs(t_actual - traj.planning_trip_time_s);
    return Punctuality{e_t <= kPunctualityToleranceS ? 1 : 0, e_t};
}

double energy_index(const Trajectory& traj, double dt_s) {
    double total = 0;
    for (const TrajectoryPoint& p : traj.points) total += std::abs(p.u_actual) * p.v_mps * dt_s;
    return total;
}

double comfort_index(const Trajectory& traj, double dt_s, double threshold) {
    double total = 0;
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        const double jerk = std::abs(traj.points[i].u_actual - traj.points[i - 1].u_actual) / dt_s;
        if (jerk > threshold) total += jerk;
    }
    return total;
}

EvaluationReport evaluate(const Trajectory& traj, const LineProfile& line) {
    if (traj.empty()) throw ValidationError("empty trajectory");
    EvaluationReport r;
    r.actual_time_s = actual_time(traj, line.destination_m());
    const Punctuality p = punctuality_index(traj, line.destination_m());
    r.punctuality = p.index;
    r.time_error_s = p.error_s;
    r.safety = safety_index(traj, line);
    r.energy = energy_index(traj, traj.dt_s);
    r.comfort = comfort_index(traj, traj.dt_s);
    return r;
}

std::string format_report(const EvaluationReport& r) {
    std::ostringstream os;
    os << "t=" << std::llround(r.actual_time_s) << "s"
       << " I_t=" << r.punctuality << " I_s=" << r.safety << " I_e=" << r.energy
       << " I_c=" << r.comfort;
    return os.str();
}

} // namespace sto
