#include "sto/trajectory.hpp"
#include "sto/errors.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sto {

namespace {

// Shortest decimal text that round-trips the double exactly.
std::string fmt_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec <= 16; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &back);
            if (back == v) return shorter;
        }
    }
    return buf;
}

} // namespace

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "# planning_trip_time_s=" << fmt_exact(traj.planning_trip_time_s)
        << " dt_s=" << fmt_exact(traj.dt_s) << "\n";
    out << "t_s,s_m,v_mps,u_cmd,u_actual,delta_Ie,jerk,rule_fired\n";
    for (const TrajectoryPoint& p : traj.points) {
        out << fmt_exact(p.t_s) << ',' << fmt_exact(p.s_m) << ',' << fmt_exact(p.v_mps) << ','
            << fmt_exact(p.u_cmd) << ',' << fmt_exact(p.u_actual) << ',' << fmt_exact(p.delta_Ie)
            << ',' << fmt_exact(p.jerk) << ',' << p.rule << "\n";
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    Trajectory traj;
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string item;
            while (meta >> item) {
                auto eq = item.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = item.substr(0, eq);
                const double val = std::strtod(item.c_str() + eq + 1, nullptr);
                if (key == "planning_trip_time_s") traj.planning_trip_time_s = val;
                if (key == "dt_s") traj.dt_s = val;
            }
            continue;
        }
        if (!header_seen) {  // column header
            header_seen = true;
            if (line.rfind("t_s,", 0) != 0)
                throw ParseError(path + ":" + std::to_string(lineno) + ": unexpected header");
            continue;
        }
        TrajectoryPoint p;
        std::istringstream ss(line);
        std::string field;
        double* slots[] = {&p.t_s, &p.s_m, &p.v_mps, &p.u_cmd, &p.u_actual, &p.delta_Ie, &p.jerk};
        for (double* slot : slots) {
            if (!std::getline(ss, field, ','))
                throw ParseError(path + ":" + std::to_string(lineno) + ": too few columns");
            char* end = nullptr;
            *slot = std::strtod(field.c_str(), &end);
            if (end == field.c_str())
                throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
        }
        if (std::getline(ss, field, ',')) p.rule = field;
        traj.points.push_back(p);
    }
    if (traj.points.empty()) throw ParseError(path + ": no trajectory rows");
    return traj;
}

void write_speed_distance_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << "s_m,v_mps\n";
    for (const TrajectoryPoint& p : traj.points)
        out << fmt_exact(p.s_m) << ',' << fmt_exact(p.v_mps) << "\n";
}

} // namespace sto
