#include "sto/env.hpp"
#include "sto/errors.hpp"
#include "sto/metrics.hpp"

#include <cmath>

namespace sto {

void RewardWeights::validate() const {
    if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0 || lambda4 < 0 || lambda5 < 0)
        throw ValidationError("reward weights must be >= 0");
}

Environment::Environment(const LineProfile& line, const TrainParams& params, EnvConfig config)
    : line_(line), params_(params), config_(std::move(config)) {
    params_.validate();
    config_.reward.validate();
    config_.guard.validate();
    if (config_.dt_s <= 0 || config_.substep_s <= 0 || config_.t_max_factor <= 0)
        throw ValidationError("env intervals must be > 0");
    t_max_s_ = config_.t_max_factor * line_.planning_trip_time_s();

    const RewardWeights& w = config_.reward;
    const double v_max = config_.v_norm_headroom * line_.max_speed_limit();
    const double j_max = 2.0 / config_.dt_s;
    reward_floor_ = -(w.lambda1 * 1.0 * v_max * config_.dt_s + w.lambda2 + w.lambda3 * j_max +
                      w.lambda4 + w.lambda5 * t_max_s_) -
                    1e-9;
}

Observation Environment::observe() const {
    const double v_max = config_.v_norm_headroom * line_.max_speed_limit();
    return Observation{state_.s_m / line_.total_length_m(), state_.v_mps / v_max};
}

Observation Environment::reset(unsigned long /*seed*/) {
    state_ = TrainState{};
    actuator_ = std::make_unique<ActuatorState>(params_, config_.substep_s);
    trajectory_ = Trajectory{};
    trajectory_.planning_trip_time_s = line_.planning_trip_time_s();
    trajectory_.dt_s = config_.dt_s;
    trajectory_.points.push_back(TrajectoryPoint{0, 0, 0, 0, 0, 0, 0, ""});
    done_ = false;
    episode_return_ = 0;
    return observe();
}

StepResult Environment::step(double action_u) {
    if (done_) throw ValidationError("step() called on a finished episode");
    if (!std::isfinite(action_u) || std::abs(action_u) > 1.5)
        throw ValidationError("action " + std::to_string(action_u) + " outside the valid range");

    const GuardDecision decision =
        filter_action(std::clamp(action_u, -1.0, 1.0), state_, line_, config_.guard, config_.dt_s);

    const StepOutcome outcome =
        integrate_control_step(state_, *actuator_, params_, line_, decision.final_u, config_.dt_s,
                               config_.substep_s, line_.destination_m());

    // The recorded row at the step start carries this step's command and outcome.
    TrajectoryPoint& row = trajectory_.points.back();
    row.u_cmd = decision.final_u;
    row.u_actual = outcome.state.u_actual;
    row.delta_Ie = outcome.delta_Ie;
    row.jerk = outcome.jerk;
    row.rule = to_string(decision.rule);

    state_ = outcome.state;
    trajectory_.points.push_back(
        TrajectoryPoint{state_.t_s, state_.s_m, state_.v_mps, 0, 0, 0, 0, ""});

    const double t_grid = row.t_s + config_.dt_s;  // nominal end of this control step
    StepInfo info;
    info.executed_u = decision.final_u;
    info.u_actual = outcome.state.u_actual;
    info.delta_Ie = outcome.delta_Ie;
    info.delta_Ic = outcome.jerk > kComfortJerkThreshold ? outcome.jerk : 0.0;
    info.time_exceeded = t_grid > line_.planning_trip_time_s();
    info.overshoot = outcome.overshoot;
    info.arrival_error_s =
        outcome.overshoot ? std::abs(t_grid - line_.planning_trip_time_s()) : 0.0;
    info.rule = decision.rule;

    const RewardWeights& w = config_.reward;
    const double reward = -w.lambda1 * info.delta_Ie -
                          w.lambda2 * (info.time_exceeded ? 1.0 : 0.0) -
                          w.lambda3 * info.delta_Ic -
                          w.lambda4 * (info.overshoot ? 1.0 : 0.0) -
                          w.lambda5 * info.arrival_error_s;
    if (!std::isfinite(reward) || reward < reward_floor_)
        throw TrainingDiverged("reward " + std::to_string(reward) + " fell below the bound " +
                               std::to_string(reward_floor_));

    done_ = outcome.crossed || state_.s_m >= line_.destination_m() || t_grid >= t_max_s_ - 1e-9;
    episode_return_ += reward;

    StepResult result;
    result.obs = observe();
    result.reward = reward;
    result.done = done_;
    result.info = info;
    return result;
}

Environment::RolloutResult Environment::rollout(const Policy& policy, unsigned long seed) {
    reset(seed);
    bool arrived = false;
    while (!done_) {
        const StepResult r = step(policy(observe()));
        arrived = arrived || r.info.overshoot || state_.s_m >= line_.destination_m();
    }
    return RolloutResult{trajectory_, episode_return_, arrived};
}

} // namespace sto
