#pragma once

#include "sto/agents.hpp"
#include "sto/env.hpp"

#include <cstdint>
#include <string>

namespace sto {

// Everything one experiment needs; parsed from the run-config file, echoed
// beside every output for provenance.
struct RunConfig {
    std::string line_path = "data/ylbs_rongjing_wanyuan.line";
    std::string params_path = "data/dkz32.params";
    EnvConfig env;
    std::string algo = "stod";
    std::string preset = "desk";
    long episodes = 0;  // 0 = preset default
    std::uint64_t seed = 1;
    std::string out_dir = "runs/out";
    long checkpoint_every = 0;

    AgentPreset make_preset() const;
};

RunConfig load_run_config(const std::string& path);

// Full round-trippable echo of the effective settings.
std::string echo_config(const RunConfig& cfg);

} // namespace sto
