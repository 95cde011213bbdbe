#pragma once

#include "sto/agents.hpp"
#include "sto/checkpoint.hpp"
#include "sto/env.hpp"

#include <string>
#include <vector>

namespace sto {

struct EpisodeLog {
    long episode = 0;
    double episode_return = 0;
    long steps = 0;
    double arrival_time_s = 0;  // episode end time when the train never arrives
    int punctual = 0;
    int safe = 0;
    double energy = 0;
    double comfort = 0;
    double critic_loss = 0;
    long wall_ms = 0;
};

struct TrainOptions {
    Algo algo = Algo::stod;
    AgentPreset preset = desk_preset();
    std::uint64_t seed = 1;
    long checkpoint_every = 0;       // additionally checkpoint every K episodes (0 = end only)
    std::string out_dir;             // empty = no files written
    bool record_timing = true;       // wall_ms column; disable for byte-stable logs
    long eval_every = 1;             // greedy evaluation cadence for snapshot selection
    bool select_best = true;         // keep the best greedy snapshot as the main checkpoint
};

struct TrainResult {
    std::vector<EpisodeLog> log;
    Checkpoint checkpoint;        // best greedy snapshot (the final one if none qualified)
    Checkpoint final_checkpoint;
    long selected_episode = -1;   // episode of the selected snapshot, -1 = final
    std::string checkpoint_path;  // empty when out_dir unset
    std::string log_path;
};

std::string format_log_csv(const std::vector<EpisodeLog>& log);

// M-episode training loop: act with exploration noise, guard-filter through the
// environment, store the executed action, update per algorithm, log one row per
// episode. Deterministic per (options, seed) apart from wall_ms.
TrainResult train(Environment& env, const TrainOptions& options);

// Greedy (noise-free) policy of a checkpointed agent.
Environment::Policy checkpoint_policy(const Checkpoint& ckpt, const AgentPreset& preset);

} // namespace sto
