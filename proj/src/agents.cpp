#include "sto/agents.hpp"
#include "sto/errors.hpp"
#include "sto/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sto {

Algo algo_from_string(const std::string& name) {
    if (name == "stod") return Algo::stod;
    if (name == "ston") return Algo::ston;
    if (name == "itor") return Algo::itor;
    throw ParseError("unknown algorithm '" + name + "' (expected stod|ston|itor)");
}

const char* to_string(Algo algo) {
    switch (algo) {
        case Algo::stod: return "stod";
        case Algo::ston: return "ston";
        case Algo::itor: return "itor";
    }
    return "?";
}

AgentPreset paper_preset() {
    AgentPreset p;
    p.name = "paper";
    p.hidden = {400, 300, 200, 100, 32};
    p.last_hidden_linear = true;
    p.actor_lr = 1e-4;
    p.critic_lr = 1e-4;  // STOD overrides its critic to 5e-5
    p.tau = 1e-3;
    p.gamma = 0.99;
    p.batch_size = 256;
    p.replay_capacity = 100000;
    p.warmup_transitions = 1000;
    p.naf_inner_iters = 4;
    p.grad_clip_norm = 0;
    p.episodes = 1750;
    return p;
}

AgentPreset desk_preset() {
    AgentPreset p;
    p.name = "desk";
    p.hidden = {64, 64};
    p.last_hidden_linear = false;
    p.actor_lr = 2e-4;
    p.critic_lr = 5e-4;
    p.tau = 1e-3;
    p.paced_fraction = 0.7;
    p.actor_delay_updates = 3000;
    p.actor_update_period = 2;
    p.warmstart_steps = 1500;
    p.noise.sigma0 = 0.15;
    p.gamma = 0.99;
    p.batch_size = 64;
    p.replay_capacity = 100000;
    p.warmup_transitions = 1000;
    p.naf_inner_iters = 4;
    p.grad_clip_norm = 50.0;  // the arrival penalty produces large TD errors
    p.noise.mu_jitter = 0.3;
    p.episodes = 300;
    return p;
}

AgentPreset preset_by_name(const std::string& name) {
    if (name == "paper") return paper_preset();
    if (name == "desk") return desk_preset();
    throw ParseError("unknown preset '" + name + "' (expected paper|desk)");
}

namespace {

std::vector<LayerSpec> stack_layers(int in_dim, const AgentPreset& preset, Activation trunk_act,
                                    int out_dim, Activation out_act) {
    std::vector<LayerSpec> specs;
    int prev = in_dim;
    for (std::size_t i = 0; i < preset.hidden.size(); ++i) {
        const bool last_hidden = (i + 1 == preset.hidden.size());
        const Activation act =
            (last_hidden && preset.last_hidden_linear) ? Activation::linear : trunk_act;
        specs.push_back(LayerSpec{prev, preset.hidden[i], act});
        prev = preset.hidden[i];
    }
    specs.push_back(LayerSpec{prev, out_dim, out_act});
    return specs;
}

double clamp_action(double u) { return std::clamp(u, -1.0, 1.0); }

} // namespace

// ---- STOD ----

DdpgAgent::DdpgAgent(int obs_dim, const AgentPreset& preset, std::uint64_t seed)
    : preset_(preset) {
    Rng rng(seed);
    // linear output head; the tanh bound is applied outside so its pre-image stays
    // observable for regularization
    actor_ = init_weights(stack_layers(obs_dim, preset, Activation::relu, 1, Activation::linear),
                          rng.next_u64());
    critic_ = init_weights(
        stack_layers(obs_dim + 1, preset, Activation::relu, 1, Activation::linear), rng.next_u64());
    target_actor_ = actor_;
    target_critic_ = critic_;
    AdamConfig ac;
    ac.learning_rate = preset.actor_lr;
    ac.grad_clip_norm = preset.grad_clip_norm;
    AdamConfig cc = ac;
    // critic tracks moving targets, learn it more carefully (paper: 5e-5 vs 1e-4)
    cc.learning_rate = preset.name == "paper" ? 5e-5 : preset.critic_lr;
    actor_opt_ = AdamState(actor_, ac);
    critic_opt_ = AdamState(critic_, cc);
}

double DdpgAgent::act(const Observation& obs) const {
    return std::tanh(actor_.forward({obs.s_norm, obs.v_norm})[0]);
}

double DdpgAgent::act_explore(const Observation& obs, OuNoise& noise) const {
    return clamp_action(act(obs) + noise.sample());
}

DdpgAgent::UpdateStats DdpgAgent::update(const std::vector<Transition>& batch, bool update_actor) {
    if (batch.empty()) throw ValidationError("empty batch");
    const double n = static_cast<double>(batch.size());

    // critic regression toward y = r + gamma (1 - done) Q'(x', mu'(x'))
    Mlp::Gradients critic_grads;
    critic_grads.init_like(critic_);
    Mlp::Cache cache;
    double critic_loss = 0;
    for (const Transition& t : batch) {
        double y = t.r;
        if (!t.done) {
            const double a_next = target_actor_.forward({t.x_next.s_norm, t.x_next.v_norm})[0];
            y += preset_.gamma *
                 target_critic_.forward({t.x_next.s_norm, t.x_next.v_norm, a_next})[0];
        }
        const double q = critic_.forward({t.x.s_norm, t.x.v_norm, t.a}, cache)[0];
        const double err = q - y;
        critic_loss += err * err / n;
        critic_.backward(cache, {2.0 * err / n}, critic_grads);
    }
    critic_opt_.update(critic_, critic_grads);

    if (!update_actor) {
        soft_update(target_critic_, critic_, preset_.tau);
        return UpdateStats{critic_loss, 0.0};
    }

    // actor ascends mean Q(x, tanh(z(x))) through the frozen critic, with a small
    // L2 pull on z to keep the tanh responsive
    Mlp::Gradients actor_grads;
    actor_grads.init_like(actor_);
    Mlp::Cache actor_cache;
    double actor_objective = 0;
    for (const Transition& t : batch) {
        const double z = actor_.forward({t.x.s_norm, t.x.v_norm}, actor_cache)[0];
        const double a = std::tanh(z);
        Mlp::Gradients dq;
        dq.init_like(critic_);
        const double q = critic_.forward({t.x.s_norm, t.x.v_norm, a}, cache)[0];
        actor_objective += q / n;
        critic_.backward(cache, {1.0}, dq);
        const double dq_da = dq.input_grad[2];
        const double dloss_dz =
            (-dq_da * (1.0 - a * a) + 2.0 * preset_.actor_pretanh_reg * z) / n;
        actor_.backward(actor_cache, {dloss_dz}, actor_grads);
    }
    actor_opt_.update(actor_, actor_grads);

    soft_update(target_critic_, critic_, preset_.tau);
    soft_update(target_actor_, actor_, preset_.tau);
    return UpdateStats{critic_loss, actor_objective};
}

double DdpgAgent::clone_step(const std::vector<Observation>& xs,
                             const std::vector<double>& z_targets) {
    const double n = static_cast<double>(xs.size());
    Mlp::Gradients grads;
    grads.init_like(actor_);
    Mlp::Cache cache;
    double loss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double z = actor_.forward({xs[i].s_norm, xs[i].v_norm}, cache)[0];
        const double err = z - z_targets[i];
        loss += err * err / n;
        actor_.backward(cache, {2.0 * err / n}, grads);
    }
    actor_opt_.update(actor_, grads);
    target_actor_ = actor_;
    return loss;
}

bool DdpgAgent::finite() const {
    return actor_.all_finite() && critic_.all_finite() && target_actor_.all_finite() &&
           target_critic_.all_finite();
}

// ---- STON ----

namespace {
// Cap on the raw Cholesky entry so exp stays finite.
constexpr double kLRawCap = 15.0;
} // namespace

NafAgent::NafAgent(int obs_dim, const AgentPreset& preset, std::uint64_t seed) : preset_(preset) {
    Rng rng(seed);
    // heads: [V, mu_raw, l_raw]
    net_ = init_weights(stack_layers(obs_dim, preset, Activation::tanh, 3, Activation::linear),
                        rng.next_u64());
    target_ = net_;
    AdamConfig cfg;
    cfg.learning_rate = preset.critic_lr;
    cfg.grad_clip_norm = preset.grad_clip_norm;
    opt_ = AdamState(net_, cfg);
}

NafAgent::QParts NafAgent::q_value(const Observation& obs, double action) const {
    const std::vector<double> out = net_.forward({obs.s_norm, obs.v_norm});
    QParts parts;
    parts.v = out[0];
    parts.mu = std::tanh(out[1]);
    const double l = std::clamp(out[2], -kLRawCap, kLRawCap);
    const double p = std::exp(2.0 * l);  // P = L L^T with L = exp(l_raw), 1-D action
    const double d = action - parts.mu;
    parts.advantage = -0.5 * p * d * d;
    parts.q = parts.v + parts.advantage;
    return parts;
}

double NafAgent::state_value(const Mlp& net, const Observation& obs) const {
    return net.forward({obs.s_norm, obs.v_norm})[0];
}

double NafAgent::act(const Observation& obs) const {
    return std::tanh(net_.forward({obs.s_norm, obs.v_norm})[1]);
}

double NafAgent::act_explore(const Observation& obs, OuNoise& noise) const {
    return clamp_action(act(obs) + noise.sample());
}

double NafAgent::update(const std::vector<Transition>& batch) {
    if (batch.empty()) throw ValidationError("empty batch");
    const double n = static_cast<double>(batch.size());

    Mlp::Gradients grads;
    grads.init_like(net_);
    Mlp::Cache cache;
    double loss = 0;
    for (const Transition& t : batch) {
        double y = t.r;
        if (!t.done) y += preset_.gamma * state_value(target_, t.x_next);

        const std::vector<double> out = net_.forward({t.x.s_norm, t.x.v_norm}, cache);
        const double v = out[0];
        const double mu = std::tanh(out[1]);
        const double l = std::clamp(out[2], -kLRawCap, kLRawCap);
        const double p = std::exp(2.0 * l);
        const double d = t.a - mu;
        const double q = v - 0.5 * p * d * d;
        const double err = q - y;
        loss += err * err / n;

        const double dloss_dq = 2.0 * err / n;
        const double dq_dv = 1.0;
        const double dq_dmu_raw = p * d * (1.0 - mu * mu);
        const double dq_dl_raw = -p * d * d;  // d/dl [-1/2 e^{2l} d^2]
        const double mu_reg = 2.0 * preset_.actor_pretanh_reg * out[1] / n;
        net_.backward(cache,
                      {dloss_dq * dq_dv, dloss_dq * dq_dmu_raw + mu_reg, dloss_dq * dq_dl_raw},
                      grads);
    }
    opt_.update(net_, grads);
    soft_update(target_, net_, preset_.tau);
    return loss;
}

double NafAgent::clone_step(const std::vector<Observation>& xs,
                            const std::vector<double>& z_targets) {
    const double n = static_cast<double>(xs.size());
    Mlp::Gradients grads;
    grads.init_like(net_);
    Mlp::Cache cache;
    double loss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const std::vector<double> out = net_.forward({xs[i].s_norm, xs[i].v_norm}, cache);
        const double err = out[1] - z_targets[i];
        loss += err * err / n;
        net_.backward(cache, {0.0, 2.0 * err / n, 0.0}, grads);
    }
    opt_.update(net_, grads);
    target_ = net_;
    return loss;
}

bool NafAgent::finite() const { return net_.all_finite() && target_.all_finite(); }

// ---- ITOR ----

DqnAgent::DqnAgent(int obs_dim, const AgentPreset& preset, std::uint64_t seed) : preset_(preset) {
    Rng rng(seed);
    net_ = init_weights(stack_layers(obs_dim, preset, Activation::relu, preset.dqn_action_count,
                                     Activation::linear),
                        rng.next_u64());
    target_ = net_;
    AdamConfig cfg;
    cfg.learning_rate = preset.critic_lr;
    cfg.grad_clip_norm = preset.grad_clip_norm;
    opt_ = AdamState(net_, cfg);
}

double DqnAgent::action_value(int index) const {
    const int n = preset_.dqn_action_count;
    return -1.0 + 2.0 * index / static_cast<double>(n - 1);
}

int DqnAgent::nearest_action_index(double u) const {
    const int n = preset_.dqn_action_count;
    const int idx = static_cast<int>(std::lround((u + 1.0) / 2.0 * (n - 1)));
    return std::clamp(idx, 0, n - 1);
}

int DqnAgent::greedy_index(const Observation& obs) const {
    const std::vector<double> q = net_.forward({obs.s_norm, obs.v_norm});
    int best = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = static_cast<int>(i);  // ties keep the lowest index
    return best;
}

double DqnAgent::act(const Observation& obs) const { return action_value(greedy_index(obs)); }

double DqnAgent::act_explore(const Observation& obs, double epsilon, Rng& rng) const {
    if (rng.uniform01() < epsilon)
        return action_value(static_cast<int>(rng.below(preset_.dqn_action_count)));
    return act(obs);
}

double DqnAgent::update(const std::vector<Transition>& batch) {
    if (batch.empty()) throw ValidationError("empty batch");
    const double n = static_cast<double>(batch.size());

    Mlp::Gradients grads;
    grads.init_like(net_);
    Mlp::Cache cache;
    double loss = 0;
    for (const Transition& t : batch) {
        double y = t.r;
        if (!t.done) {
            const std::vector<double> qn = target_.forward({t.x_next.s_norm, t.x_next.v_norm});
            y += preset_.gamma * *std::max_element(qn.begin(), qn.end());
        }
        const int a_idx = nearest_action_index(t.a);
        const std::vector<double> q = net_.forward({t.x.s_norm, t.x.v_norm}, cache);
        const double err = q[a_idx] - y;
        loss += err * err / n;
        std::vector<double> out_grad(q.size(), 0.0);
        out_grad[a_idx] = 2.0 * err / n;
        net_.backward(cache, out_grad, grads);
    }
    opt_.update(net_, grads);
    soft_update(target_, net_, preset_.tau);
    return loss;
}

bool DqnAgent::finite() const { return net_.all_finite() && target_.all_finite(); }

// ---- scripted driver ----

double ScriptedDriver::propose(double s_m, double v_mps, double destination_m) {
    // gains stay low: the actuation pipeline answers a command one second late
    const double remaining = destination_m - s_m;
    if (remaining <= crawl_window_m) {
        // hold the landing speed across the stop marker
        return std::clamp(0.35 * (landing_speed_mps - v_mps), -0.6, 0.4);
    }
    // braking parabola from the crawl window entry back along the track,
    // anticipated by one actuation reaction time
    const double d_ahead = std::max(0.0, remaining - crawl_window_m - v_mps * reaction_time_s);
    const double v_ref = std::sqrt(landing_speed_mps * landing_speed_mps +
                                   2.0 * brake_rate_mps2 * d_ahead);
    if (!braking_started && v_mps >= v_ref) braking_started = true;
    if (braking_started)
        return std::clamp(-brake_rate_mps2 + 0.35 * (v_ref - v_mps), -1.0, 0.05);
    // full traction rolling off into a hold at the cruise speed
    return std::clamp(0.4 * (cruise_speed_mps - v_mps), -0.3, 1.0);
}

ScriptedResult scripted_drive(Environment& env, double target_time_s) {
    const double v_max = env.line().max_speed_limit();
    constexpr double kLandingMin = 1.0, kLandingMax = 6.5;

    auto run = [&](double cruise, double landing) -> std::pair<double, Trajectory> {
        ScriptedDriver driver{cruise, landing};
        const auto result = env.rollout([&](const Observation& obs) {
            const double s = obs.s_norm * env.line().total_length_m();
            const double v = obs.v_norm * env.config().v_norm_headroom * v_max;
            return driver.propose(s, v, env.line().destination_m());
        });
        if (!result.arrived) return {std::numeric_limits<double>::infinity(), result.trajectory};
        return {actual_time(result.trajectory, env.line().destination_m()), result.trajectory};
    };

    const auto [fastest_time, fastest_traj] = run(v_max, kLandingMax);
    if (fastest_time > target_time_s + 1.0)
        throw InfeasibleError("time-optimal profile needs " + std::to_string(fastest_time) +
                              " s, cannot meet " + std::to_string(target_time_s) + " s");

    // The control grid and the guard's own braking quantize both knobs, so a
    // direct 2-D search beats bisection. Among all candidates arriving within
    // tolerance, keep the lowest-energy profile: the published manual baseline is
    // itself the best of many recorded trips.
    double best_cruise = v_max, best_landing = kLandingMax;
    double best_err = std::abs(fastest_time - target_time_s);
    double best_energy = std::numeric_limits<double>::infinity();
    bool accepted = false;
    auto consider = [&](double c, double l) {
        const auto [t, traj] = run(c, l);
        if (!std::isfinite(t)) return;
        const double err = std::abs(t - target_time_s);
        const bool ok = err <= 0.9;
        double energy = 0;
        for (const TrajectoryPoint& p : traj.points) energy += p.delta_Ie;
        const bool better = accepted ? (ok && energy < best_energy) : (ok || err < best_err);
        if (better) {
            best_err = err;
            best_cruise = c;
            best_landing = l;
            best_energy = energy;
            accepted = accepted || ok;
        }
    };
    for (double c = 5.0; c <= v_max + 1e-9; c += 0.4)
        for (double l = kLandingMax; l >= 1.5 - 1e-9; l -= 1.0) consider(c, l);
    const double c0 = best_cruise, l0 = best_landing;
    for (double c = std::max(5.0, c0 - 0.4); c <= std::min(v_max, c0 + 0.4) + 1e-9; c += 0.1)
        for (double l = std::max(kLandingMin, l0 - 1.0); l <= std::min(kLandingMax, l0 + 1.0) + 1e-9;
             l += 0.1)
            consider(c, l);

    const auto [final_time, final_traj] = run(best_cruise, best_landing);
    if (!std::isfinite(final_time) || std::abs(final_time - target_time_s) > 1.0)
        throw InfeasibleError("could not match " + std::to_string(target_time_s) +
                              " s (closest arrival " + std::to_string(final_time) + " s)");
    return ScriptedResult{final_traj, best_cruise, best_landing, final_time};
}

} // namespace sto
