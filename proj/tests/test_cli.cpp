// Exercises the built CLI binary end to end: exit codes, file outputs and
// digest-level determinism. The binary path arrives in NLGLRT_CLI.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "nlglrt/io.hpp"
#include "nlglrt/run_config.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("NLGLRT_CLI");
    REQUIRE_MESSAGE(p != nullptr, "NLGLRT_CLI must point at the built binary");
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>/tmp/nlglrt_cli_err.txt";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string last_stderr() {
    std::ifstream in("/tmp/nlglrt_cli_err.txt");
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return all;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("nlglrt_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str() const { return path.string(); }
};

// small, fast scene: enough samples for one training run and a short trace,
// with the onset late enough that edited streams still cover it
std::string write_small_config(const fs::path& dir, const std::string& extra = "") {
    const std::string path = (dir / "run.cfg").string();
    nlglrt::write_file(path,
                       "scene.num_samples = 400\n"
                       "scene.onset_t0 = 300\n"
                       "scene.window_k = 48\n"
                       "scene.seed = 5\n"
                       "train.max_epochs = 40\n"
                       "train.patience = 40\n"
                       "evaluation.seeds = 21,22\n"
                       "output_dir = " + (dir / "out").string() + "\n" + extra);
    return path;
}

}  // namespace

TEST_CASE("missing subcommand fails without crashing") {
    CHECK(run_cli("") != 0);
}

TEST_CASE("a malformed config exits 2 and names the invariant") {
    TempDir dir;
    const std::string cfg = (dir.path / "bad.cfg").string();
    nlglrt::write_file(cfg, "scene.window_k = 200\nscene.onset_t0 = 100\n");
    CHECK(run_cli("generate --config " + cfg) == 2);
    CHECK(last_stderr().find("window_k") != std::string::npos);
}

TEST_CASE("an unparseable config exits 2 with a line diagnostic") {
    TempDir dir;
    const std::string cfg = (dir.path / "bad.cfg").string();
    nlglrt::write_file(cfg, "scene.num_samples == 100\n");
    CHECK(run_cli("generate --config " + cfg) == 2);
    CHECK(last_stderr().find(":1:") != std::string::npos);
}

TEST_CASE("generate is reproducible at the digest level") {
    TempDir dir;
    const std::string cfg = write_small_config(dir.path);
    REQUIRE(run_cli("generate --config " + cfg) == 0);
    const std::string lin = (dir.path / "out/scene_linear.csv").string();
    REQUIRE(fs::exists(lin));
    const std::string digest1 = nlglrt::sha256_file_hex(lin);

    // regenerate into a second directory
    REQUIRE(run_cli("generate --config " + cfg + " --out " + (dir.path / "out2").string()) == 0);
    const std::string digest2 =
        nlglrt::sha256_file_hex((dir.path / "out2/scene_linear.csv").string());
    CHECK(digest1 == digest2);

    // round-trip reload matches the generator output
    const auto loaded = nlglrt::load_scene((dir.path / "out").string());
    CHECK(loaded.config.seed == 5);
    CHECK(loaded.z_linear.cols() == 400);
}

TEST_CASE("train writes a model with the configured shape chain and is seed-stable") {
    TempDir dir;
    const std::string cfg = write_small_config(dir.path);
    REQUIRE(run_cli("train --config " + cfg) == 0);
    const std::string model_path = (dir.path / "out/model.json").string();
    REQUIRE(fs::exists(model_path));
    REQUIRE(fs::exists(dir.path / "out/training_loss.csv"));

    const auto j = nlohmann::json::parse(nlglrt::read_file(model_path));
    CHECK(j.at("layer_sizes") == nlohmann::json({8, 10, 10, 10, 2}));

    const std::string digest1 = nlglrt::sha256_file_hex(model_path);
    REQUIRE(run_cli("train --config " + cfg) == 0);
    CHECK(nlglrt::sha256_file_hex(model_path) == digest1);
}

TEST_CASE("evaluate produces a summary and is byte-stable") {
    TempDir dir;
    const std::string cfg = write_small_config(dir.path);
    REQUIRE(run_cli("train --config " + cfg) == 0);
    REQUIRE(run_cli("evaluate --config " + cfg +
                    " --modes linear,nonlinear,nonlinear_dnn") == 0);
    const std::string summary_path = (dir.path / "out/summary.json").string();
    REQUIRE(fs::exists(summary_path));
    const auto j = nlohmann::json::parse(nlglrt::read_file(summary_path));
    CHECK(j.at("modes").size() == 3);
    for (const auto& [name, block] : j.at("modes").items()) {
        CHECK(block.at("auc").get<double>() >= 0.0);
        CHECK(block.at("auc").get<double>() <= 1.0);
    }
    const std::string digest1 = nlglrt::sha256_file_hex(summary_path);
    REQUIRE(run_cli("evaluate --config " + cfg +
                    " --modes linear,nonlinear,nonlinear_dnn") == 0);
    CHECK(nlglrt::sha256_file_hex(summary_path) == digest1);
}

TEST_CASE("a missing model for dnn modes exits 4") {
    TempDir dir;
    const std::string cfg = write_small_config(dir.path);
    CHECK(run_cli("evaluate --config " + cfg + " --modes nonlinear_dnn --model " +
                  (dir.path / "nope.json").string()) == 4);
}

TEST_CASE("a flag-everything model exits 5") {
    TempDir dir;
    const std::string cfg = write_small_config(dir.path);
    // craft a degenerate model: zero weights, output bias forcing the flag
    nlglrt::StreamRng rng(1, nlglrt::RngStream::weight_init);
    nlglrt::MlpModel model = nlglrt::make_mlp(8, 1, 3, rng);
    for (auto& l : model.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    model.layers.back().b = {0.0, 25.0};
    const std::string model_path = (dir.path / "flagall.json").string();
    nlglrt::write_model(model, nlglrt::TrainConfig{}, model_path);
    CHECK(run_cli("evaluate --config " + cfg + " --modes nonlinear_dnn --model " + model_path) ==
          5);
    CHECK(last_stderr().find("seed 21") != std::string::npos);
}

TEST_CASE("seed overrides narrow the evaluation") {
    TempDir dir;
    const std::string cfg = write_small_config(dir.path);
    REQUIRE(run_cli("evaluate --config " + cfg + " --modes linear --seeds 31") == 0);
    CHECK(fs::exists(dir.path / "out/trace_linear_31.csv"));
    CHECK_FALSE(fs::exists(dir.path / "out/trace_linear_21.csv"));
}
