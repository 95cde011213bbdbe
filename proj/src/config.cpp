#include "sto/config.hpp"
#include "sto/kvfile.hpp"

#include <cstdio>
#include <sstream>

namespace sto {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

AgentPreset RunConfig::make_preset() const {
    AgentPreset p = preset_by_name(preset);
    if (episodes > 0) p.episodes = episodes;
    return p;
}

RunConfig load_run_config(const std::string& path) {
    const KvFile kv = KvFile::parse_file(path);
    RunConfig cfg;
    const KvFile::Table& root = kv.root();
    cfg.line_path = root.text_or("line", cfg.line_path);
    cfg.params_path = root.text_or("train_params", cfg.params_path);

    if (const KvFile::Table* env = kv.table("env")) {
        cfg.env.dt_s = env->number_or("dt_s", cfg.env.dt_s);
        cfg.env.substep_s = env->number_or("substep_s", cfg.env.substep_s);
        cfg.env.t_max_factor = env->number_or("t_max_factor", cfg.env.t_max_factor);
        cfg.env.v_norm_headroom = env->number_or("v_norm_headroom", cfg.env.v_norm_headroom);
    }
    if (const KvFile::Table* rw = kv.table("reward")) {
        cfg.env.reward.lambda1 = rw->number_or("lambda1", cfg.env.reward.lambda1);
        cfg.env.reward.lambda2 = rw->number_or("lambda2", cfg.env.reward.lambda2);
        cfg.env.reward.lambda3 = rw->number_or("lambda3", cfg.env.reward.lambda3);
        cfg.env.reward.lambda4 = rw->number_or("lambda4", cfg.env.reward.lambda4);
        cfg.env.reward.lambda5 = rw->number_or("lambda5", cfg.env.reward.lambda5);
    }
    if (const KvFile::Table* g = kv.table("guard")) {
        cfg.env.guard.beta = g->number_or("beta", cfg.env.guard.beta);
        cfg.env.guard.u_min = g->number_or("u_min", cfg.env.guard.u_min);
        cfg.env.guard.start_accel_cap = g->number_or("start_accel_cap", cfg.env.guard.start_accel_cap);
        cfg.env.guard.coast_band = g->number_or("coast_band", cfg.env.guard.coast_band);
        cfg.env.guard.start_speed_threshold =
            g->number_or("start_speed_threshold", cfg.env.guard.start_speed_threshold);
        cfg.env.guard.reaction_time_s = g->number_or("reaction_time_s", cfg.env.guard.reaction_time_s);
    }
    if (const KvFile::Table* t = kv.table("train")) {
        cfg.algo = t->text_or("algo", cfg.algo);
        cfg.preset = t->text_or("preset", cfg.preset);
        cfg.episodes = static_cast<long>(t->number_or("episodes", 0));
        cfg.seed = static_cast<std::uint64_t>(t->number_or("seed", static_cast<double>(cfg.seed)));
        cfg.out_dir = t->text_or("out_dir", cfg.out_dir);
        cfg.checkpoint_every = static_cast<long>(t->number_or("checkpoint_every", 0));
    }
    return cfg;
}

std::string echo_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "line = \"" << cfg.line_path << "\"\n";
    os << "train_params = \"" << cfg.params_path << "\"\n\n";
    os << "[env]\n";
    os << "dt_s = " << fmt(cfg.env.dt_s) << "\n";
    os << "substep_s = " << fmt(cfg.env.substep_s) << "\n";
    os << "t_max_factor = " << fmt(cfg.env.t_max_factor) << "\n";
    os << "v_norm_headroom = " << fmt(cfg.env.v_norm_headroom) << "\n\n";
    os << "[reward]\n";
    os << "lambda1 = " << fmt(cfg.env.reward.lambda1) << "\n";
    os << "lambda2 = " << fmt(cfg.env.reward.lambda2) << "\n";
    os << "lambda3 = " << fmt(cfg.env.reward.lambda3) << "\n";
    os << "lambda4 = " << fmt(cfg.env.reward.lambda4) << "\n";
    os << "lambda5 = " << fmt(cfg.env.reward.lambda5) << "\n\n";
    os << "[guard]\n";
    os << "beta = " << fmt(cfg.env.guard.beta) << "\n";
    os << "u_min = " << fmt(cfg.env.guard.u_min) << "\n";
    os << "start_accel_cap = " << fmt(cfg.env.guard.start_accel_cap) << "\n";
    os << "coast_band = " << fmt(cfg.env.guard.coast_band) << "\n";
    os << "start_speed_threshold = " << fmt(cfg.env.guard.start_speed_threshold) << "\n";
    os << "reaction_time_s = " << fmt(cfg.env.guard.reaction_time_s) << "\n\n";
    os << "[train]\n";
    os << "algo = \"" << cfg.algo << "\"\n";
    os << "preset = \"" << cfg.preset << "\"\n";
    os << "episodes = " << cfg.episodes << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "out_dir = \"" << cfg.out_dir << "\"\n";
    os << "checkpoint_every = " << cfg.checkpoint_every << "\n";
    return os.str();
}

} // namespace sto
