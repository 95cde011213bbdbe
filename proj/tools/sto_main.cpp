#include "sto/agents.hpp"
#include "sto/config.hpp"
#include "sto/env.hpp"
#include "sto/errors.hpp"
#include "sto/metrics.hpp"
#include "sto/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <tuple>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitDiverged = 4;

struct ComparisonRow {
    std::string model;
    double trip_time_s = 0;
    double t = 0;
    int I_t = 0;
    int I_s = 0;
    double I_e = 0;
    double I_c = 0;
};

std::string row_csv(const ComparisonRow& r) {
    std::ostringstream os;
    os << r.model << ',' << r.trip_time_s << ',' << std::llround(r.t) << ',' << r.I_t << ','
       << r.I_s << ',' << r.I_e << ',' << r.I_c;
    return os.str();
}

ComparisonRow report_row(const std::string& model, double trip_time,
                         const sto::EvaluationReport& rep) {
    return ComparisonRow{model, trip_time,    rep.actual_time_s, rep.punctuality,
                         rep.safety, rep.energy, rep.comfort};
}

// Like sto::evaluate but tolerates trajectories that never arrive (I_t = 0).
sto::EvaluationReport report_or_partial(const sto::Trajectory& traj, const sto::LineProfile& line) {
    try {
        return sto::evaluate(traj, line);
    } catch (const sto::InfeasibleError&) {
        sto::EvaluationReport rep;
        rep.punctuality = 0;
        rep.safety = sto::safety_index(traj, line);
        rep.energy = sto::energy_index(traj, traj.dt_s);
        rep.comfort = sto::comfort_index(traj, traj.dt_s);
        rep.actual_time_s = traj.back().t_s;
        rep.time_error_s = std::abs(rep.actual_time_s - traj.planning_trip_time_s);
        return rep;
    }
}

void print_table(std::vector<ComparisonRow> rows, std::ostream& out) {
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        return a.trip_time_s != b.trip_time_s ? a.trip_time_s < b.trip_time_s : a.model < b.model;
    });
    out << "model                 trip_time   t      I_t  I_s  I_e        I_c\n";
    for (const ComparisonRow& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-21s %-11g %-6lld %-4d %-4d %-10.2f %.2f\n",
                      r.model.c_str(), r.trip_time_s, static_cast<long long>(std::llround(r.t)),
                      r.I_t, r.I_s, r.I_e, r.I_c);
        out << buf;
    }
}

void append_rows(const std::string& path, const std::vector<ComparisonRow>& rows) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw sto::ParseError("cannot write " + path);
    if (fresh) out << "model,trip_time_s,t,I_t,I_s,I_e,I_c\n";
    for (const ComparisonRow& r : rows) out << row_csv(r) << "\n";
}

std::vector<ComparisonRow> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sto::ParseError("cannot open " + path);
    std::vector<ComparisonRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("model,", 0) == 0) continue;
        std::istringstream ss(line);
        ComparisonRow r;
        std::string field;
        std::getline(ss, r.model, ',');
        auto num = [&](double& slot) {
            if (!std::getline(ss, field, ','))
                throw sto::ParseError(path + ": short comparison row '" + line + "'");
            slot = std::strtod(field.c_str(), nullptr);
        };
        double it = 0, is = 0;
        num(r.trip_time_s);
        num(r.t);
        num(it);
        num(is);
        num(r.I_e);
        num(r.I_c);
        r.I_t = static_cast<int>(it);
        r.I_s = static_cast<int>(is);
        rows.push_back(r);
    }
    return rows;
}

sto::LineProfile load_line_with_trip_time(const std::string& path, double trip_time_s) {
    sto::LineProfile base = sto::load_line(path);
    if (trip_time_s <= 0) return base;
    return sto::LineProfile(base.sections(), trip_time_s, base.approximate());
}

std::uint64_t seed_fallback(std::uint64_t cli_seed, bool seed_given) {
    if (seed_given) return cli_seed;
    if (const char* env = std::getenv("STO_SEED")) return std::strtoull(env, nullptr, 10);
    return cli_seed;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw sto::ParseError("cannot write " + path);
    out << content;
}

// Rolls out a policy, writes trajectory artifacts, and returns the report.
sto::EvaluationReport run_and_export(sto::Environment& env, const sto::Environment::Policy& policy,
                                     const std::string& out_prefix) {
    const auto rollout = env.rollout(policy);
    if (!out_prefix.empty()) {
        sto::write_trajectory_csv(rollout.trajectory, out_prefix + "_trajectory.csv");
        sto::write_speed_distance_csv(rollout.trajectory, out_prefix + "_speed_distance.csv");
    }
    return sto::evaluate(rollout.trajectory, env.line());
}

int cmd_validate_line(const std::string& path) {
    try {
        const sto::LineProfile line = sto::load_line(path);
        std::cout << "PASS: " << path << " (" << line.sections().size() << " sections, "
                  << line.total_length_m() << " m, " << line.planning_trip_time_s() << " s"
                  << (line.approximate() ? ", approximate" : "") << ")\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cout << "FAIL: " << e.what() << "\n";
        return kExitValidation;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sto - smart train operation laboratory"};
    app.require_subcommand(1);

    // validate-line
    std::string vl_path;
    CLI::App* validate = app.add_subcommand("validate-line", "check a line file");
    validate->add_option("path", vl_path, "line file")->required();

    // simulate
    std::string sim_line, sim_params = "data/dkz32.params", sim_agent = "scripted", sim_out;
    double sim_trip = 0;
    CLI::App* simulate = app.add_subcommand("simulate", "run one episode and report the indices");
    simulate->add_option("--line", sim_line, "line file")->required();
    simulate->add_option("--params", sim_params, "train parameter file");
    simulate->add_option("--agent", sim_agent, "'scripted' or a checkpoint path");
    simulate->add_option("--trip-time", sim_trip, "override the planning trip time (s)");
    simulate->add_option("--out", sim_out, "output directory");

    // train
    std::string tr_config, tr_algo, tr_preset, tr_out;
    std::uint64_t tr_seed = 1;
    long tr_episodes = 0;
    bool tr_no_timing = false;
    CLI::App* train_cmd = app.add_subcommand("train", "train an agent");
    train_cmd->add_option("--config", tr_config, "run-config file");
    train_cmd->add_option("--algo", tr_algo, "stod|ston|itor");
    train_cmd->add_option("--preset", tr_preset, "paper|desk");
    train_cmd->add_option("--episodes", tr_episodes, "episode count override");
    CLI::Option* seed_opt = train_cmd->add_option("--seed", tr_seed, "training seed");
    train_cmd->add_option("--out", tr_out, "output directory");
    train_cmd->add_flag("--no-timing", tr_no_timing, "write wall_ms as 0 for byte-stable logs");

    // evaluate
    std::string ev_traj, ev_line, ev_params = "data/dkz32.params", ev_ckpt, ev_append, ev_model;
    double ev_trip = 0;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "evaluate a trajectory or a checkpoint");
    eval_cmd->add_option("trajectory", ev_traj, "trajectory CSV");
    eval_cmd->add_option("--line", ev_line, "line file")->required();
    eval_cmd->add_option("--params", ev_params, "train parameter file");
    eval_cmd->add_option("--checkpoint", ev_ckpt, "checkpoint to roll out instead of a CSV");
    eval_cmd->add_option("--trip-time", ev_trip, "override the planning trip time (s)");
    eval_cmd->add_option("--append-to", ev_append, "append a comparison row to this CSV");
    eval_cmd->add_option("--model", ev_model, "model label for the comparison row");

    // compare
    std::vector<std::string> cmp_inputs;
    std::string cmp_out;
    CLI::App* compare = app.add_subcommand("compare", "merge comparison rows into one table");
    compare->add_option("inputs", cmp_inputs, "comparison CSV files")->required();
    compare->add_option("--out", cmp_out, "write the merged CSV here");

    // case
    int case_id = 1;
    std::string case_out = "runs/case", case_preset = "desk", case_line_dir = "data";
    std::vector<std::uint64_t> case_seeds{1};
    long case_episodes = 0;
    CLI::App* case_cmd = app.add_subcommand("case", "run one of the three study pipelines");
    case_cmd->add_option("--case", case_id, "1, 2 or 3")->required();
    case_cmd->add_option("--out", case_out, "output directory");
    case_cmd->add_option("--preset", case_preset, "paper|desk");
    case_cmd->add_option("--episodes", case_episodes, "episode count override");
    case_cmd->add_option("--seed", case_seeds, "training seed(s)");
    case_cmd->add_option("--data-dir", case_line_dir, "directory holding the shipped line files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate_line(vl_path);

        if (*simulate) {
            const sto::LineProfile line = load_line_with_trip_time(sim_line, sim_trip);
            const sto::TrainParams params = sto::load_train_params(sim_params);
            sto::Environment env(line, params, sto::EnvConfig{});
            std::string prefix;
            if (!sim_out.empty()) {
                std::filesystem::create_directories(sim_out);
                prefix = sim_out + "/" + (sim_agent == "scripted" ? "scripted" : "agent");
            }
            sto::EvaluationReport rep;
            if (sim_agent == "scripted") {
                const sto::ScriptedResult res = sto::scripted_drive(env, line.planning_trip_time_s());
                if (!prefix.empty()) {
                    sto::write_trajectory_csv(res.trajectory, prefix + "_trajectory.csv");
                    sto::write_speed_distance_csv(res.trajectory, prefix + "_speed_distance.csv");
                }
                rep = sto::evaluate(res.trajectory, line);
            } else {
                const sto::Checkpoint ckpt = sto::load_checkpoint(sim_agent);
                rep = run_and_export(env, sto::checkpoint_policy(ckpt, sto::desk_preset()), prefix);
            }
            std::cout << sto::format_report(rep) << "\n";
            return kExitOk;
        }

        if (*train_cmd) {
            sto::RunConfig cfg;
            if (!tr_config.empty()) cfg = sto::load_run_config(tr_config);
            if (!tr_algo.empty()) cfg.algo = tr_algo;
            if (!tr_preset.empty()) cfg.preset = tr_preset;
            if (tr_episodes > 0) cfg.episodes = tr_episodes;
            cfg.seed = seed_fallback(*seed_opt ? tr_seed : cfg.seed, static_cast<bool>(*seed_opt));
            if (!tr_out.empty()) cfg.out_dir = tr_out;

            const sto::LineProfile line = sto::load_line(cfg.line_path);
            const sto::TrainParams params = sto::load_train_params(cfg.params_path);
            sto::Environment env(line, params, cfg.env);

            sto::TrainOptions options;
            options.algo = sto::algo_from_string(cfg.algo);
            options.preset = cfg.make_preset();
            options.seed = cfg.seed;
            options.out_dir = cfg.out_dir;
            options.checkpoint_every = cfg.checkpoint_every;
            options.record_timing = !tr_no_timing;

            std::filesystem::create_directories(cfg.out_dir);
            write_text(cfg.out_dir + "/config_echo.txt", sto::echo_config(cfg));
            const sto::TrainResult result = sto::train(env, options);
            std::cout << "checkpoint: " << result.checkpoint_path << "\n"
                      << "log: " << result.log_path << "\n";
            return kExitOk;
        }

        if (*eval_cmd) {
            const sto::LineProfile line = load_line_with_trip_time(ev_line, ev_trip);
            sto::EvaluationReport rep;
            if (!ev_ckpt.empty()) {
                const sto::TrainParams params = sto::load_train_params(ev_params);
                sto::Environment env(line, params, sto::EnvConfig{});
                const sto::Checkpoint ckpt = sto::load_checkpoint(ev_ckpt);
                rep = run_and_export(env, sto::checkpoint_policy(ckpt, sto::desk_preset()), "");
                if (ev_model.empty()) ev_model = ckpt.algo;
            } else {
                if (ev_traj.empty())
                    throw sto::ValidationError("need a trajectory CSV or --checkpoint");
                const sto::Trajectory traj = sto::read_trajectory_csv(ev_traj);
                rep = sto::evaluate(traj, line);
                if (ev_model.empty()) ev_model = std::filesystem::path(ev_traj).stem().string();
            }
            std::cout << sto::format_report(rep) << "\n";
            if (!ev_append.empty())
                append_rows(ev_append, {report_row(ev_model, line.planning_trip_time_s(), rep)});
            return kExitOk;
        }

        if (*compare) {
            std::vector<ComparisonRow> rows;
            for (const std::string& path : cmp_inputs) {
                const auto r = read_rows(path);
                rows.insert(rows.end(), r.begin(), r.end());
            }
            if (rows.empty()) throw sto::ValidationError("no comparison rows in the inputs");
            print_table(rows, std::cout);
            if (!cmp_out.empty()) {
                std::sort(rows.begin(), rows.end(),
                          [](const ComparisonRow& a, const ComparisonRow& b) {
                              return a.trip_time_s != b.trip_time_s ? a.trip_time_s < b.trip_time_s
                                                                    : a.model < b.model;
                          });
                std::ofstream out(cmp_out);
                out << "model,trip_time_s,t,I_t,I_s,I_e,I_c\n";
                for (const ComparisonRow& r : rows) out << row_csv(r) << "\n";
            }
            return kExitOk;
        }

        if (*case_cmd) {
            if (case_id < 1 || case_id > 3) throw sto::ValidationError("--case must be 1, 2 or 3");
            const std::string line_file =
                case_line_dir + (case_id == 3 ? "/ylbs_rongjing_wanyuan_newgrade.line"
                                              : "/ylbs_rongjing_wanyuan.line");
            const std::vector<double> trip_times =
                case_id == 2 ? std::vector<double>{95.0, 115.0} : std::vector<double>{101.0};
            const sto::TrainParams params = sto::load_train_params(case_line_dir + "/dkz32.params");
            std::filesystem::create_directories(case_out);

            std::vector<ComparisonRow> rows;
            for (const double trip : trip_times) {
                const sto::LineProfile line = load_line_with_trip_time(line_file, trip);
                const std::string tag = std::to_string(static_cast<int>(trip)) + "s";

                sto::Environment scripted_env(line, params, sto::EnvConfig{});
                const sto::ScriptedResult scripted = sto::scripted_drive(scripted_env, trip);
                sto::write_speed_distance_csv(scripted.trajectory,
                                              case_out + "/scripted_" + tag + "_speed_distance.csv");
                rows.push_back(report_row("scripted (" + tag + ")", trip,
                                          sto::evaluate(scripted.trajectory, line)));

                for (const std::string algo : {"itor", "stod", "ston"}) {
                    sto::TrainOptions options;
                    options.algo = sto::algo_from_string(algo);
                    options.preset = sto::preset_by_name(case_preset);
                    if (case_episodes > 0) options.preset.episodes = case_episodes;
                    options.out_dir = case_out + "/" + algo + "_" + tag;

                    // train every seed, keep the best punctual+safe run by energy
                    sto::Trajectory best_traj;
                    sto::EvaluationReport best_rep;
                    bool have_best = false;
                    for (const std::uint64_t seed : case_seeds) {
                        options.seed = seed;
                        sto::Environment env(line, params, sto::EnvConfig{});
                        const sto::TrainResult result = sto::train(env, options);
                        sto::Environment eval_env(line, params, sto::EnvConfig{});
                        const auto rollout = eval_env.rollout(
                            sto::checkpoint_policy(result.checkpoint, options.preset));
                        const sto::EvaluationReport rep = report_or_partial(rollout.trajectory, line);
                        const bool better =
                            !have_best ||
                            std::make_tuple(-rep.punctuality, -rep.safety, rep.energy) <
                                std::make_tuple(-best_rep.punctuality, -best_rep.safety,
                                                best_rep.energy);
                        if (better) {
                            best_traj = rollout.trajectory;
                            best_rep = rep;
                            have_best = true;
                        }
                    }
                    sto::write_trajectory_csv(best_traj, case_out + "/" + algo + "_" + tag +
                                                             "_trajectory.csv");
                    sto::write_speed_distance_csv(best_traj, case_out + "/" + algo + "_" + tag +
                                                                 "_speed_distance.csv");
                    rows.push_back(report_row(algo + " (" + tag + ")", trip, best_rep));
                }
            }
            std::ofstream table(case_out + "/comparison.csv");
            table << "model,trip_time_s,t,I_t,I_s,I_e,I_c\n";
            for (const ComparisonRow& r : rows) table << row_csv(r) << "\n";
            print_table(rows, std::cout);
            return kExitOk;
        }
    } catch (const sto::TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const sto::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
