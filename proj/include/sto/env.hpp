#pragma once

#include "sto/dynamics.hpp"
#include "sto/guard.hpp"
#include "sto/line.hpp"
#include "sto/trajectory.hpp"

#include <functional>
#include <memory>

namespace sto {

struct Observation {
    double s_norm = 0;  // position / total length
    double v_norm = 0;  // velocity / (headroom * max line limit)
};

struct RewardWeights {
    double lambda1 = 0.13;  // per-step energy
    double lambda2 = 30.0;  // running past the planning time
    double lambda3 = 10.0;  // above-threshold jerk
    double lambda4 = 400.0; // overshooting the destination
    double lambda5 = 70.0;  // arrival-time error
    void validate() const;  // throws ValidationError
};

struct EnvConfig {
    double dt_s = 1.0;
    double substep_s = 0.1;
    double t_max_factor = 2.0;        // episode cutoff = factor * planning time
    double v_norm_headroom = 1.1;     // observation scaling above the line maximum
    RewardWeights reward;
    GuardConfig guard;
};

struct StepInfo {
    double executed_u = 0;   // post-guard command
    double u_actual = 0;     // actuator-realized acceleration for the step
    double delta_Ie = 0;
    double delta_Ic = 0;     // above-threshold jerk, else 0
    bool time_exceeded = false;  // e'_t
    bool overshoot = false;      // D
    double arrival_error_s = 0;  // Acc = D * |t - T_planning|
    GuardRule rule = GuardRule::none;
};

struct StepResult {
    Observation obs;
    double reward = 0;
    bool done = false;
    StepInfo info;
};

// Episodic environment: guard-filtered continuous acceleration control of one
// inter-station run. Physics is deterministic; all exploration noise lives in
// the agents, so equal seeds and equal action sequences give identical episodes.
class Environment {
public:
    Environment(const LineProfile& line, const TrainParams& params, EnvConfig config);

    Observation reset(unsigned long seed = 0);
    StepResult step(double action_u);

    bool done() const { return done_; }
    const Trajectory& trajectory() const { return trajectory_; }
    const TrainState& state() const { return state_; }
    const LineProfile& line() const { return line_; }
    const TrainParams& params() const { return params_; }
    const EnvConfig& config() const { return config_; }
    Observation observe() const;
    double episode_return() const { return episode_return_; }

    using Policy = std::function<double(const Observation&)>;
    struct RolloutResult {
        Trajectory trajectory;
        double episode_return = 0;
        bool arrived = false;
    };
    RolloutResult rollout(const Policy& policy, unsigned long seed = 0);

private:
    const LineProfile& line_;
    TrainParams params_;
    EnvConfig config_;
    TrainState state_;
    std::unique_ptr<ActuatorState> actuator_;
    Trajectory trajectory_;
    bool done_ = true;
    double t_max_s_ = 0;
    double episode_return_ = 0;
    double reward_floor_ = 0;
};

} // namespace sto
