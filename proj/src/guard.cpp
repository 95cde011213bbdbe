#include "sto/guard.hpp"
#include "sto/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sto {

const char* to_string(GuardRule rule) {
    switch (rule) {
        case GuardRule::none: return "none";
        case GuardRule::no_direct_transition: return "no_direct_transition";
        case GuardRule::start_cap: return "start_cap";
        case GuardRule::safe_velocity_brake: return "safe_velocity_brake";
        case GuardRule::current_limit_clamp: return "current_limit_clamp";
    }
    return "?";
}

void GuardConfig::validate() const {
    if (beta <= 0 || beta > 1) throw ValidationError("guard beta must be in (0, 1]");
    if (u_min >= 0) throw ValidationError("guard u_min must be < 0");
    if (start_accel_cap <= 0) throw ValidationError("guard start_accel_cap must be > 0");
    if (coast_band < 0) throw ValidationError("guard coast_band must be >= 0");
    if (reaction_time_s < 0) throw ValidationError("guard reaction_time_s must be >= 0");
}

std::optional<double> safe_velocity(const LineProfile& line, double s_m, const GuardConfig& cfg) {
    const std::optional<LimitDrop> drop = line.next_limit_drop(s_m);
    if (!drop) return std::nullopt;
    const double d = drop->boundary_m - s_m;
    return std::sqrt(cfg.beta * drop->limit_mps * drop->limit_mps - 2.0 * cfg.u_min * d);
}

DriveState classify_state(double u, const GuardConfig& cfg) {
    if (u > cfg.coast_band) return DriveState::accelerating;
    if (u < -cfg.coast_band) return DriveState::braking;
    return DriveState::coasting;
}

namespace {

// Strongest deceleration the braking command can count on between here and the
// boundary: service braking weakened by the steepest downhill assistance ahead.
double effective_u_min(const LineProfile& line, double from_m, double to_m, const GuardConfig& cfg) {
    const double grade = line.min_gradient_between(from_m, to_m);
    const double assist = grade < 0 ? cfg.gravity_mps2 * -std::sin(grade) : 0.0;
    return std::min(cfg.u_min + assist, -0.05);
}

// Downhill gravity can accelerate a coasting train; bound it over a short window ahead.
double downhill_assist(const LineProfile& line, double s_m, double window_m, const GuardConfig& cfg) {
    const double grade = line.min_gradient_between(s_m, s_m + window_m);
    return grade < 0 ? cfg.gravity_mps2 * -std::sin(grade) : 0.0;
}

// True when the braking curve toward any downstream limit drop demands immediate
// service braking. Pessimistic: assumes the in-flight acceleration keeps acting for
// the actuation reaction time (plus one control step if a coast must be interposed).
bool brake_required(const TrainState& st, double proposed, const LineProfile& line,
                    const GuardConfig& cfg, double horizon_s) {
    const std::size_t idx = line.section_index_at(std::min(st.s_m, line.total_length_m()));
    const auto& sections = line.sections();

    const double a_pess =
        std::max({st.u_actual, st.u_commanded_prev, proposed, 0.0}) +
        downhill_assist(line, st.s_m, st.v_mps * horizon_s + 0.5 * horizon_s * horizon_s, cfg);
    const double v_pess = st.v_mps + a_pess * horizon_s;
    const double s_pess = st.s_m + st.v_mps * horizon_s + 0.5 * a_pess * horizon_s * horizon_s;

    for (std::size_t j = idx + 1; j < sections.size(); ++j) {
        const double lim_j = sections[j].speed_limit_mps;
        if (lim_j >= st.v_mps && lim_j >= v_pess) continue;  // not binding
        const double boundary = sections[j].start_m;
        const double u_brk = effective_u_min(line, st.s_m, boundary, cfg);

        // plain trigger at the current state
        const double d_now = boundary - st.s_m;
        const double v_safe_now = std::sqrt(cfg.beta * lim_j * lim_j - 2.0 * u_brk * d_now);
        if (st.v_mps >= v_safe_now) return true;

        // anticipated trigger after the reaction window
        const double d_fut = std::max(0.0, boundary - s_pess);
        const double v_safe_fut = std::sqrt(cfg.beta * lim_j * lim_j - 2.0 * u_brk * d_fut);
        if (v_pess >= v_safe_fut) return true;
    }
    return false;
}

} // namespace

GuardDecision filter_action(double proposed_u, const TrainState& state, const LineProfile& line,
                            const GuardConfig& cfg, double dt_s) {
    double u = std::clamp(proposed_u, -1.0, 1.0);
    const DriveState prev = classify_state(state.u_commanded_prev, cfg);

    // 1. braking-curve supervision toward downstream limit drops. Braking after an
    // accelerating step needs one interposed coast step; letting an accelerating
    // command through now may cost that interposition one step later, so the
    // trigger looks one extra step ahead in each case.
    double horizon = cfg.reaction_time_s;
    if (prev == DriveState::accelerating) horizon += dt_s;
    else if (classify_state(u, cfg) == DriveState::accelerating) horizon += 2.0 * dt_s;
    if (brake_required(state, u, line, cfg, horizon)) {
        if (prev == DriveState::accelerating)
            return {0.0, GuardRule::no_direct_transition};  // legalize with one coast step
        return {std::max(cfg.u_min, -1.0), GuardRule::safe_velocity_brake};
    }

    // 2. no direct accelerating <-> braking transition
    const DriveState wanted = classify_state(u, cfg);
    if ((prev == DriveState::accelerating && wanted == DriveState::braking) ||
        (prev == DriveState::braking && wanted == DriveState::accelerating)) {
        return {0.0, GuardRule::no_direct_transition};
    }

    // 3. start-phase acceleration cap
    if (state.v_mps < cfg.start_speed_threshold && u > cfg.start_accel_cap) {
        return {cfg.start_accel_cap, GuardRule::start_cap};
    }

    // 4. current-section limit clamp. Commands already in the actuation pipeline keep
    // acting for the reaction time no matter what is commanded now, so the speed
    // budget for the new command is what remains after that momentum plays out.
    const double lim = line.speed_limit_at(std::min(state.s_m, line.total_length_m()));
    const double clamp_window = dt_s + cfg.reaction_time_s;
    const double assist = downhill_assist(line, state.s_m, state.v_mps * clamp_window, cfg);
    const double inflight = std::max({state.u_actual, state.u_commanded_prev, 0.0});
    const double momentum = (inflight + assist) * cfg.reaction_time_s;
    double cap = (lim - state.v_mps - momentum) / dt_s - assist;
    cap = std::clamp(cap, -1.0, 1.0);
    if (cap < u) {
        // never turn an accelerating train straight into a braking command
        if (prev == DriveState::accelerating) cap = std::max(cap, 0.0);
        return {cap, GuardRule::current_limit_clamp};
    }

    return {u, GuardRule::none};
}

} // namespace sto
