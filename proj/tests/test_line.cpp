#include <doctest.h>

#include "sto/errors.hpp"
#include "sto/line.hpp"
#include "sto/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

using namespace sto;

namespace {

LineProfile make_line(std::vector<std::tuple<double, double, double>> spans,
                      double trip = 101.0) {
    std::vector<TrackSection> sections;
    for (auto& [a, b, lim] : spans) sections.push_back(TrackSection{a, b, lim, 0.0, {}});
    return LineProfile(std::move(sections), trip);
}

std::string write_temp(const std::string& content) {
    static int counter = 0;
    std::string path = "test_line_tmp_" + std::to_string(counter++) + ".line";
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("single-section line matching the shipped headline numbers") {
    const std::string path = write_temp(
        "total_length_m = 1280\n"
        "planning_trip_time_s = 101\n"
        "[[section]]\n"
        "start_m = 0\nend_m = 1280\nspeed_limit_mps = 22.22\ngrade_permille = 0\n");
    const LineProfile line = load_line(path);
    CHECK(line.destination_m() == 1280.0);
    CHECK(line.planning_trip_time_s() == 101.0);
    CHECK(line.sections().size() == 1);
    std::remove(path.c_str());
}

TEST_CASE("gap between sections is rejected with the position named") {
    const std::string path = write_temp(
        "total_length_m = 1280\n"
        "planning_trip_time_s = 101\n"
        "[[section]]\nstart_m = 0\nend_m = 500\nspeed_limit_mps = 20\n"
        "[[section]]\nstart_m = 600\nend_m = 1280\nspeed_limit_mps = 20\n");
    CHECK_THROWS_WITH_AS(load_line(path), doctest::Contains("gap"), ValidationError);
    std::remove(path.c_str());
}

TEST_CASE("curve radius at the singular 55 m is rejected") {
    std::vector<TrackSection> sections{{0, 100, 20, 0, 55.0}};
    CHECK_THROWS_AS(LineProfile(std::move(sections), 60), ValidationError);
}

TEST_CASE("overlap, nonpositive limit, bad trip time") {
    CHECK_THROWS_AS(make_line({{0, 500, 20}, {450, 1280, 20}}), ValidationError);
    CHECK_THROWS_AS(make_line({{0, 500, 0.0}}), ValidationError);
    CHECK_THROWS_AS(make_line({{0, 500, 20}}, -1.0), ValidationError);
}

TEST_CASE("section lookup follows the half-open convention") {
    const LineProfile line = make_line({{0, 600, 20}, {600, 1280, 15}});
    CHECK(line.section_index_at(0) == 0);
    CHECK(line.section_index_at(599.999) == 0);
    CHECK(line.section_index_at(600) == 1);         // boundary belongs to the next section
    CHECK(line.section_index_at(1280) == 1);        // final point closed
    CHECK_THROWS_AS(line.section_index_at(-0.1), ValidationError);
    CHECK_THROWS_AS(line.section_index_at(1280.1), ValidationError);
}

TEST_CASE("piecewise-constant lookups") {
    std::vector<TrackSection> sections{
        {0, 600, 20, grade_permille_to_angle(2.0), {}},
        {600, 1280, 15, 0.0, 800.0},
    };
    const LineProfile line(std::move(sections), 101);
    CHECK(line.speed_limit_at(100) == 20.0);
    CHECK(line.speed_limit_at(700) == 15.0);
    CHECK(line.gradient_at(10) == doctest::Approx(std::atan(0.002)).epsilon(1e-15));
    CHECK(line.gradient_at(700) == 0.0);
    CHECK_FALSE(line.curve_radius_at(10).has_value());
    CHECK(line.curve_radius_at(700).value() == 800.0);
}

TEST_CASE("next limit drop reads the nearest lower boundary") {
    const LineProfile two = make_line({{0, 600, 20}, {600, 1280, 15}});
    auto drop = two.next_limit_drop(100);
    REQUIRE(drop.has_value());
    CHECK(drop->boundary_m == 600.0);
    CHECK(drop->limit_mps == 15.0);

    // nearest drop, not the lowest
    const LineProfile three = make_line({{0, 400, 20}, {400, 800, 18}, {800, 1280, 12}});
    drop = three.next_limit_drop(100);
    REQUIRE(drop.has_value());
    CHECK(drop->boundary_m == 400.0);
    CHECK(drop->limit_mps == 18.0);

    // nondecreasing limits ahead -> none
    const LineProfile rising = make_line({{0, 400, 15}, {400, 1280, 20}});
    CHECK_FALSE(rising.next_limit_drop(100).has_value());
}

TEST_CASE("every position belongs to exactly one section (randomized)") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TrackSection> sections;
        double pos = 0;
        const int n = 2 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            const double len = 50.0 + rng.uniform(0, 400);
            sections.push_back(TrackSection{pos, pos + len, 5.0 + rng.uniform(0, 20), 0, {}});
            pos += len;
        }
        const LineProfile line(std::move(sections), 100);
        for (int k = 0; k < 200; ++k) {
            const double s = rng.uniform(0, line.total_length_m());
            int containing = 0;
            for (const TrackSection& sec : line.sections()) {
                const bool last = &sec == &line.sections().back();
                if (s >= sec.start_m && (s < sec.end_m || (last && s <= sec.end_m))) ++containing;
            }
            CHECK(containing == 1);
            const std::size_t idx = line.section_index_at(s);
            CHECK(line.sections()[idx].start_m <= s);
        }
    }
}

TEST_CASE("next_limit_drop agrees with a brute-force boundary scan (randomized)") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<TrackSection> sections;
        double pos = 0;
        const int n = 2 + static_cast<int>(rng.below(7));
        for (int i = 0; i < n; ++i) {
            const double len = 80.0 + rng.uniform(0, 300);
            sections.push_back(TrackSection{pos, pos + len, 6.0 + rng.uniform(0, 19), 0, {}});
            pos += len;
        }
        const LineProfile line(std::move(sections), 100);
        for (int k = 0; k < 50; ++k) {
            const double s = rng.uniform(0, line.total_length_m());
            const double here = line.speed_limit_at(s);
            // brute force over every downstream boundary
            std::optional<LimitDrop> expect;
            for (const TrackSection& sec : line.sections()) {
                if (sec.start_m > s && sec.speed_limit_mps < here) {
                    expect = LimitDrop{sec.start_m, sec.speed_limit_mps};
                    break;
                }
            }
            const auto got = line.next_limit_drop(s);
            CHECK(got.has_value() == expect.has_value());
            if (got && expect) {
                CHECK(got->boundary_m == expect->boundary_m);
                CHECK(got->limit_mps == expect->limit_mps);
            }
        }
    }
}

TEST_CASE("shipped line files load and validate") {
    const LineProfile base = load_line("data/ylbs_rongjing_wanyuan.line");
    CHECK(base.total_length_m() == 1280.0);
    CHECK(base.planning_trip_time_s() == 101.0);
    CHECK(base.approximate());
    const LineProfile alt = load_line("data/ylbs_rongjing_wanyuan_newgrade.line");
    CHECK(alt.total_length_m() == 1280.0);
    CHECK(alt.sections().size() == base.sections().size());
}
