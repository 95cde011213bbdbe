#include "sto/line.hpp"
#include "sto/errors.hpp"
#include "sto/kvfile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sto {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

double grade_permille_to_angle(double grade_permille) {
    return std::atan(grade_permille / 1000.0);
}

LineProfile::LineProfile(std::vector<TrackSection> sections, double planning_trip_time_s,
                         bool approximate)
    : sections_(std::move(sections)),
      planning_trip_time_s_(planning_trip_time_s),
      approximate_(approximate) {
    if (sections_.empty()) throw ValidationError("line has no sections");
    if (planning_trip_time_s_ <= 0)
        throw ValidationError("planning_trip_time_s must be > 0, got " + fmt(planning_trip_time_s_));
    if (sections_.front().start_m != 0)
        throw ValidationError("first section must start at 0, starts at " +
                              fmt(sections_.front().start_m));
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        const TrackSection& sec = sections_[i];
        if (sec.end_m <= sec.start_m)
            throw ValidationError("section " + std::to_string(i) + ": end_m " + fmt(sec.end_m) +
                                  " must exceed start_m " + fmt(sec.start_m));
        if (sec.speed_limit_mps <= 0)
            throw ValidationError("section " + std::to_string(i) + ": nonpositive speed limit " +
                                  fmt(sec.speed_limit_mps));
        if (sec.curve_radius_m && *sec.curve_radius_m <= 55.0)
            throw ValidationError("section " + std::to_string(i) + ": curve radius " +
                                  fmt(*sec.curve_radius_m) +
                                  " must exceed 55 m (curve resistance is singular at 55)");
        if (i > 0 && sections_[i - 1].end_m != sec.start_m) {
            const double at = sections_[i - 1].end_m;
            throw ValidationError(std::string(sec.start_m > at ? "gap" : "overlap") +
                                  " between sections at " + fmt(at));
        }
    }
    total_length_m_ = sections_.back().end_m;
    max_limit_ = 0;
    for (const TrackSection& sec : sections_) max_limit_ = std::max(max_limit_, sec.speed_limit_mps);
}

std::size_t LineProfile::section_index_at(double s) const {
    if (s < 0 || s > total_length_m_)
        throw ValidationError("position " + fmt(s) + " is outside [0, " + fmt(total_length_m_) + "]");
    if (s >= sections_.back().start_m) return sections_.size() - 1;
    // first section with end_m > s
    std::size_t lo = 0, hi = sections_.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (sections_[mid].end_m > s) hi = mid; else lo = mid + 1;
    }
    return lo;
}

double LineProfile::speed_limit_at(double s) const {
    return sections_[section_index_at(s)].speed_limit_mps;
}

double LineProfile::gradient_at(double s) const {
    return sections_[section_index_at(s)].slope_angle_rad;
}

std::optional<double> LineProfile::curve_radius_at(double s) const {
    return sections_[section_index_at(s)].curve_radius_m;
}

std::optional<LimitDrop> LineProfile::next_limit_drop(double s) const {
    const std::size_t idx = section_index_at(s);
    const double here = sections_[idx].speed_limit_mps;
    for (std::size_t j = idx + 1; j < sections_.size(); ++j) {
        if (sections_[j].speed_limit_mps < here)
            return LimitDrop{sections_[j].start_m, sections_[j].speed_limit_mps};
    }
    return std::nullopt;
}

double LineProfile::min_gradient_between(double from_m, double to_m) const {
    from_m = std::clamp(from_m, 0.0, total_length_m_);
    to_m = std::clamp(to_m, from_m, total_length_m_);
    double lo = sections_[section_index_at(from_m)].slope_angle_rad;
    for (std::size_t j = section_index_at(from_m); j < sections_.size(); ++j) {
        if (sections_[j].start_m > to_m) break;
        lo = std::min(lo, sections_[j].slope_angle_rad);
    }
    return lo;
}

LineProfile load_line(const std::string& path) {
    const KvFile kv = KvFile::parse_file(path);
    const KvFile::Table& root = kv.root();
    const double total = root.number("total_length_m");
    const double trip = root.number("planning_trip_time_s");
    const bool approx = root.boolean_or("approximate", false);

    std::vector<TrackSection> sections;
    for (const KvFile::Table& t : kv.table_array("section")) {
        TrackSection sec;
        sec.start_m = t.number("start_m");
        sec.end_m = t.number("end_m");
        sec.speed_limit_mps = t.number("speed_limit_mps");
        sec.slope_angle_rad = grade_permille_to_angle(t.number_or("grade_permille", 0.0));
        if (t.has("curve_radius_m")) sec.curve_radius_m = t.number("curve_radius_m");
        sections.push_back(sec);
    }
    if (sections.empty()) throw ParseError(path + ": no [[section]] entries");

    LineProfile line(std::move(sections), trip, approx);
    if (line.total_length_m() != total)
        throw ValidationError(path + ": total_length_m " + fmt(total) +
                              " does not match last section end " + fmt(line.total_length_m()));
    return line;
}

} // namespace sto
