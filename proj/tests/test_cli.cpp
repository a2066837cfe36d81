// End-to-end checks of the rescuesim binary: train / eval / replay flows,
// exit codes and byte-identical outputs under a fixed seed.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = std::string(RESCUESIM_CLI_PATH) + " " + args + " 2>/dev/null";
    if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
    else cmd += " > /dev/null";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rescuesim_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int counter() {
        static int n = 0;
        return n++;
    }
};

const std::string kSmokeScenario = std::string(RESCUESIM_SCENARIO_DIR) + "/smoke.json";

}  // namespace

TEST_CASE("train writes the rewards table and checkpoint; reruns are identical") {
    TempDir tmp;
    fs::path train_cfg = tmp.path / "train.json";
    spit(train_cfg,
         R"({"strategy":"iql","episodes":5,"warmup_transitions":5,)"
         R"("updates_per_episode":1,"hidden_width":8})");

    fs::path out_a = tmp.path / "a", out_b = tmp.path / "b";
    int rc = run("train --scenario " + kSmokeScenario + " --train-config " +
                 train_cfg.string() + " --out " + out_a.string() + " --seed 3");
    CHECK(rc == 0);
    rc = run("train --scenario " + kSmokeScenario + " --train-config " +
             train_cfg.string() + " --out " + out_b.string() + " --seed 3");
    CHECK(rc == 0);

    std::string rewards = slurp(out_a / "rewards.csv");
    CHECK(rewards == slurp(out_b / "rewards.csv"));
    CHECK(slurp(out_a / "checkpoint.json") == slurp(out_b / "checkpoint.json"));
    // Header + 5 rows.
    CHECK(std::count(rewards.begin(), rewards.end(), '\n') == 6);
    CHECK(rewards.find("episode,strategy,return,mean_loss,epsilon") == 0);
    CHECK(rewards.find("iql") != std::string::npos);
}

TEST_CASE("eval on a checkpoint trained at the one-cell scenario") {
    TempDir tmp;
    fs::path train_cfg = tmp.path / "train.json";
    // Enough experience to rank the forward action above Wait.
    spit(train_cfg,
         R"({"strategy":"qmix","episodes":150,"warmup_transitions":30,)"
         R"("updates_per_episode":4,"hidden_width":16,"mixer_embed":8,"seed":2})");
    fs::path out = tmp.path / "run";
    CHECK(run("train --scenario " + kSmokeScenario + " --train-config " +
              train_cfg.string() + " --out " + out.string()) == 0);

    fs::path eval_out = tmp.path / "eval.txt";
    fs::path trace = tmp.path / "trace.jsonl";
    int rc = run("eval --scenario " + kSmokeScenario + " --checkpoint " +
                     (out / "checkpoint.json").string() +
                     " --episodes 2 --trace " + trace.string(),
                 eval_out);
    CHECK(rc == 0);
    std::string report = slurp(eval_out);
    CHECK(report.find("mean return: 100.9") != std::string::npos);
    CHECK(report.find("mean steps-to-arrival: 1") != std::string::npos);

    // The trace replays into a one-row summary ending at distance 0.
    fs::path replay_out = tmp.path / "replay.csv";
    CHECK(run("replay " + trace.string(), replay_out) == 0);
    std::string summary = slurp(replay_out);
    CHECK(summary.find("tick,engine0_dist,collisions,cum_reward") == 0);
    CHECK(summary.find("1,0,,100.9") != std::string::npos);
}

TEST_CASE("eval with zero episodes exits cleanly") {
    TempDir tmp;
    fs::path train_cfg = tmp.path / "train.json";
    spit(train_cfg, R"({"strategy":"iql","episodes":1,"warmup_transitions":1})");
    fs::path out = tmp.path / "run";
    CHECK(run("train --scenario " + kSmokeScenario + " --train-config " +
              train_cfg.string() + " --out " + out.string()) == 0);
    fs::path eval_out = tmp.path / "eval.txt";
    CHECK(run("eval --scenario " + kSmokeScenario + " --checkpoint " +
                  (out / "checkpoint.json").string() + " --episodes 0",
              eval_out) == 0);
    CHECK(slurp(eval_out).find("no episodes requested") != std::string::npos);
}

TEST_CASE("validation failures exit with code 1") {
    TempDir tmp;
    fs::path bad = tmp.path / "bad.json";
    spit(bad, R"({"graph": {"grid": {"width": 0, "height": 1, "edge_len": 1}}})");
    fs::path train_cfg = tmp.path / "train.json";
    spit(train_cfg, R"({"strategy":"iql","episodes":1})");
    CHECK(run("train --scenario " + bad.string() + " --train-config " +
              train_cfg.string() + " --out " + (tmp.path / "x").string()) == 1);
    CHECK(run("replay " + (tmp.path / "missing.jsonl").string()) == 1);
    CHECK(run("nonsense-subcommand") == 1);
}

TEST_CASE("checkpoint/scenario mismatch is a diagnostic exit") {
    TempDir tmp;
    fs::path train_cfg = tmp.path / "train.json";
    spit(train_cfg, R"({"strategy":"iql","episodes":1,"warmup_transitions":1})");
    fs::path out = tmp.path / "run";
    CHECK(run("train --scenario " + kSmokeScenario + " --train-config " +
              train_cfg.string() + " --out " + out.string()) == 0);
    std::string desk = std::string(RESCUESIM_SCENARIO_DIR) + "/desk.json";
    CHECK(run("eval --scenario " + desk + " --checkpoint " +
              (out / "checkpoint.json").string() + " --episodes 1") == 1);
}
