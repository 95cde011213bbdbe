#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sto {

// One track section with a piecewise-constant speed limit, slope and optional curve.
// Sections are half-open [start_m, end_m); the last section also contains its end point.
struct TrackSection {
    double start_m = 0;
    double end_m = 0;
    double speed_limit_mps = 0;
    double slope_angle_rad = 0;               // positive = uphill
    std::optional<double> curve_radius_m;     // absent = straight; must be > 55 when present
};

struct LimitDrop {
    double boundary_m;    // start of the first downstream section with a lower limit
    double limit_mps;     // that section's limit
};

class LineProfile {
public:
    LineProfile(std::vector<TrackSection> sections, double planning_trip_time_s,
                bool approximate = false);

    double total_length_m() const { return total_length_m_; }
    double destination_m() const { return total_length_m_; }
    double planning_trip_time_s() const { return planning_trip_time_s_; }
    bool approximate() const { return approximate_; }
    const std::vector<TrackSection>& sections() const { return sections_; }

    // Unique section containing s under the half-open convention.
    std::size_t section_index_at(double s) const;

    double speed_limit_at(double s) const;
    double gradient_at(double s) const;     // slope angle, rad
    std::optional<double> curve_radius_at(double s) const;

    // Nearest downstream section whose limit is strictly below the limit at s.
    std::optional<LimitDrop> next_limit_drop(double s) const;

    // Highest speed limit on the whole line (observation scaling).
    double max_speed_limit() const { return max_limit_; }
    // Most negative slope angle over [from_m, to_m] (downhill assistance bound).
    double min_gradient_between(double from_m, double to_m) const;

private:
    std::vector<TrackSection> sections_;
    double total_length_m_;
    double planning_trip_time_s_;
    bool approximate_;
    double max_limit_;
};

// Grade in per-mille to slope angle: angle = atan(grade / 1000).
double grade_permille_to_angle(double grade_permille);

LineProfile load_line(const std::string& path);

} // namespace sto
