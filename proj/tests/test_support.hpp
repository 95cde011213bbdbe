#pragma once

#include "sto/env.hpp"
#include "sto/line.hpp"
#include "sto/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sto::testing {

// Random but drivable line: section lengths leave room to brake between
// successive limit drops at service deceleration with actuation margin.
inline LineProfile random_line(Rng& rng) {
    const int n = 2 + static_cast<int>(rng.below(5));
    std::vector<TrackSection> sections;
    double pos = 0;
    double prev_limit = 8.0 + rng.uniform(0, 14.0);
    for (int i = 0; i < n; ++i) {
        const double limit = i == 0 ? prev_limit : 8.0 + rng.uniform(0, 14.0);
        // room to brake from the previous section's limit down to this one
        const double braking_need =
            std::max(0.0, prev_limit * prev_limit - limit * limit) / 2.0 + prev_limit * 4.0;
        const double len = std::max(braking_need + 60.0, 150.0 + rng.uniform(0, 350.0));
        TrackSection sec{pos, pos + len, limit, grade_permille_to_angle(rng.uniform(-25, 25)), {}};
        if (rng.below(4) == 0) sec.curve_radius_m = 200.0 + rng.uniform(0, 1500);
        sections.push_back(sec);
        pos += len;
        prev_limit = limit;
    }
    const double trip = pos / (4.0 + rng.uniform(0, 8.0));
    return LineProfile(std::move(sections), trip);
}

inline TrainParams default_params() { return TrainParams{}; }

} // namespace sto::testing
