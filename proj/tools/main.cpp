// rescuesim command-line harness: train / eval / serve / replay.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rescuesim/envserver.hpp"
#include "rescuesim/trainer.hpp"

namespace fs = std::filesystem;
using namespace rescuesim;

namespace {

EnvServer* g_server = nullptr;

void handle_interrupt(int) {
    if (g_server) g_server->stop();
}

ScenarioConfig load_scenario(const std::string& path,
                             std::optional<uint64_t> seed_override) {
    ScenarioConfig sc = ScenarioConfig::load(path);
    if (seed_override) sc.seeds = {*seed_override};
    return sc;
}

int cmd_train(const std::string& scenario_path, const std::string& train_path,
              const std::string& out_dir, std::optional<uint64_t> seed) {
    ScenarioConfig scenario = load_scenario(scenario_path, seed);
    TrainConfig tc = TrainConfig::load(train_path);
    if (seed) tc.seed = *seed;

    fs::create_directories(out_dir);
    std::ofstream rewards(fs::path(out_dir) / "rewards.csv");
    if (!rewards) throw ValidationError("cannot write to output directory " + out_dir);
    rewards << rewards_csv_header() << "\n";

    TrainResult result = train(scenario, tc, [&](const EpisodeLog& log) {
        rewards << rewards_csv_row(log) << "\n";
        if (log.episode % 100 == 0)
            std::cerr << "episode " << log.episode << " strategy " << log.strategy
                      << " return " << log.episode_return << " epsilon " << log.epsilon
                      << "\n";
    });
    rewards.close();

    std::ofstream ckpt(fs::path(out_dir) / "checkpoint.json");
    ckpt << result.checkpoint.dump(2) << "\n";
    ckpt.close();

    std::cout << "wrote " << (fs::path(out_dir) / "rewards.csv").string() << " ("
              << result.log.size() << " episodes) and "
              << (fs::path(out_dir) / "checkpoint.json").string() << "\n";
    return 0;
}

int cmd_eval(const std::string& scenario_path, const std::string& checkpoint_path,
             int episodes, const std::string& out_file,
             const std::string& trace_file, std::optional<uint64_t> seed) {
    ScenarioConfig scenario = load_scenario(scenario_path, seed);
    std::ifstream in(checkpoint_path);
    if (!in) throw ValidationError("cannot open checkpoint: " + checkpoint_path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json ckpt = parse_json_text(ss.str(), "checkpoint " + checkpoint_path);

    Env env(scenario);
    auto strategy = load_strategy(ckpt, env);
    Rng rng(scenario.seeds[0] + 1);

    std::ofstream out_csv;
    if (!out_file.empty()) {
        out_csv.open(out_file);
        if (!out_csv) throw ValidationError("cannot write " + out_file);
    }
    std::ostream* csv = out_file.empty() ? nullptr : &out_csv;
    if (csv) *csv << "episode,return,steps,collisions,arrival_ticks\n";

    double sum_return = 0, sum_steps = 0;
    long collisions = 0;
    double sum_arrival = 0;
    long arrivals = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        std::ofstream trace_out;
        std::ostream* sink = nullptr;
        if (!trace_file.empty() && ep == 0) {
            trace_out.open(trace_file);
            if (!trace_out) throw ValidationError("cannot write " + trace_file);
            sink = &trace_out;
        }
        EpisodeResult er = run_episode(env, *strategy, 0.0, rng, sink,
                                       strategy->name());
        sum_return += er.episode_return;
        sum_steps += er.steps;
        collisions += er.collision_count;
        std::string ticks;
        for (size_t i = 0; i < er.arrival_ticks.size(); ++i) {
            int at = er.arrival_ticks[i];
            if (at >= 0) {
                sum_arrival += at;
                ++arrivals;
            }
            ticks += (i ? ";" : "") + std::to_string(at);
        }
        std::cout << "episode " << ep << ": return " << er.episode_return
                  << ", steps " << er.steps << ", collisions " << er.collision_count
                  << ", arrival_ticks [" << ticks << "]\n";
        if (csv)
            *csv << ep << "," << er.episode_return << "," << er.steps << ","
                 << er.collision_count << "," << ticks << "\n";
    }
    if (episodes > 0) {
        std::cout << "mean return: " << sum_return / episodes << "\n";
        std::cout << "mean steps: " << sum_steps / episodes << "\n";
        std::cout << "mean steps-to-arrival: "
                  << (arrivals > 0 ? sum_arrival / arrivals : -1.0) << "\n";
        std::cout << "total collisions: " << collisions << "\n";
    } else {
        std::cout << "no episodes requested\n";
    }
    return 0;
}

int cmd_serve(const std::string& scenario_path, int port, int session_limit,
              std::optional<uint64_t> seed) {
    // Validate before binding so config errors exit early.
    ScenarioConfig scenario = load_scenario(scenario_path, seed);
    Env probe(scenario);
    std::cerr << "scenario ok: " << probe.agents().size() << " agents, serving on port "
              << port << "\n";

    EnvServer server(session_limit);
    server.set_request_logger(
        [](const std::string& line) { std::cerr << line << "\n"; });
    g_server = &server;
    std::signal(SIGINT, handle_interrupt);
    std::signal(SIGTERM, handle_interrupt);
    if (!server.listen("0.0.0.0", port)) {
        g_server = nullptr;
        std::cerr << "error: cannot bind port " << port << "\n";
        return 1;
    }
    g_server = nullptr;
    std::cerr << "shut down\n";
    return 0;
}

int cmd_replay(const std::string& trace_path, const std::string& out_file) {
    std::ifstream in(trace_path);
    if (!in) throw ValidationError("cannot open trace: " + trace_path);
    Trace trace = parse_trace(in);
    auto rows = replay_summary(trace);

    std::ofstream out_csv;
    std::ostream* out = &std::cout;
    if (!out_file.empty()) {
        out_csv.open(out_file);
        if (!out_csv) throw ValidationError("cannot write " + out_file);
        out = &out_csv;
    }

    int engines = rows.empty() ? 0 : static_cast<int>(rows[0].engine_dist.size());
    int lights = rows.empty() ? 0 : static_cast<int>(rows[0].phases.size());
    *out << "tick";
    for (int i = 0; i < engines; ++i) *out << ",engine" << i << "_dist";
    for (int i = 0; i < lights; ++i) *out << ",light" << i << "_phase";
    *out << ",collisions,cum_reward\n";
    for (const ReplayRow& row : rows) {
        *out << row.tick;
        for (int d : row.engine_dist) *out << "," << d;
        for (const std::string& p : row.phases) *out << "," << p;
        *out << "," << row.collisions << "," << row.cumulative_reward << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"urban emergency-rescue traffic simulator and MARL harness"};
    app.require_subcommand(1);

    std::string scenario_path, train_path, checkpoint_path, trace_path;
    std::string train_out = "out", eval_out, replay_out;
    int episodes = 10;
    int port = 8080;
    int session_limit = 64;
    std::optional<uint64_t> seed;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the scenario seed list");
    };

    CLI::App* train_cmd = app.add_subcommand("train", "train a strategy");
    train_cmd->add_option("--scenario", scenario_path, "scenario JSON")->required();
    train_cmd->add_option("--train-config", train_path, "train config JSON")->required();
    train_cmd->add_option("--out", train_out, "output directory");
    add_seed(train_cmd);

    CLI::App* eval_cmd = app.add_subcommand("eval", "greedy rollouts from a checkpoint");
    eval_cmd->add_option("--scenario", scenario_path, "scenario JSON")->required();
    eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    eval_cmd->add_option("--episodes", episodes, "episode count")->default_val(10);
    eval_cmd->add_option("--out", eval_out, "per-episode CSV output");
    eval_cmd->add_option("--trace", trace_path, "write episode 0's trace here");
    add_seed(eval_cmd);

    CLI::App* serve_cmd = app.add_subcommand("serve", "run the HTTP environment service");
    serve_cmd->add_option("--scenario", scenario_path, "scenario JSON")->required();
    serve_cmd->add_option("--port", port, "TCP port")->default_val(8080);
    serve_cmd->add_option("--session-limit", session_limit, "max concurrent sessions")
        ->default_val(64);
    add_seed(serve_cmd);

    CLI::App* replay_cmd = app.add_subcommand("replay", "summarize an episode trace");
    replay_cmd->add_option("trace", trace_path, "trace file (JSON lines)")->required();
    replay_cmd->add_option("--out", replay_out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(train_cmd))
            return cmd_train(scenario_path, train_path, train_out, seed);
        if (app.got_subcommand(eval_cmd))
            return cmd_eval(scenario_path, checkpoint_path, episodes, eval_out,
                            trace_path, seed);
        if (app.got_subcommand(serve_cmd))
            return cmd_serve(scenario_path, port, session_limit, seed);
        if (app.got_subcommand(replay_cmd))
            return cmd_replay(trace_path, replay_out);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NoRouteError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
